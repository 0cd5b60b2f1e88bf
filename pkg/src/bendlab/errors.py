"""Exception types shared across the package."""


class BendlabError(Exception):
    """Base class for all package-specific errors."""


class NotLoxodromic(BendlabError):
    """Matrix has no axis/displacement decomposition (identity, parabolic or elliptic)."""


class DegenerateLeaf(BendlabError):
    """A lamination leaf coincides with the carrier geodesic of a segment."""


class DegenerateImage(BendlabError):
    """A boundary transfer collapsed two distinct endpoints."""


class CapExceeded(BendlabError):
    """Requested word-ball radius exceeds the configured cap."""


class MismatchedContexts(BendlabError):
    """Partition bundles built over incompatible contexts were combined."""


class NonConvergentDifference(BendlabError):
    """Finite-difference derivative failed its step-halving consistency check."""


class NoDisjointCurveFound(BendlabError):
    """Word-ball search found no simple closed geodesic disjoint from the base orbit."""


class ContextValidationError(BendlabError):
    """Bending context rejected its basepoint (too close to a translate axis)."""


class ConfigError(BendlabError):
    """Malformed or inconsistent experiment configuration."""
