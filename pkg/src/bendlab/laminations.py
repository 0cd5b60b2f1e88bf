"""Measured geodesic laminations as finite weighted leaf sets in a window.

A finite lamination is a list of leaves (geodesic + complex weight) whose
supports are pairwise disjoint or equal, together with a compact window disc
that every leaf meets.  Group-invariant laminations are materialized by
enumerating a word ball and keeping the translates that meet the target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import CapExceeded, DegenerateLeaf
from .hypcore import (
    BOUNDARY_TOL,
    ENDPOINT_TOL,
    Geodesic,
    GeodesicSegment,
    SegmentCrossing,
    cross,
    distance_h2,
    distance_to_geodesic,
    segment_crossing,
)
from .fuchsian import Representation

_MERGE_TOL = 1e-9        # user-level merge of equal geodesics
_ORBIT_DEDUP_TOL = 1e-6  # chordal gap below which two translates are the same leaf


def _chordal_gap(a: float, b: float) -> float:
    """Distance of boundary points in the chordal (stereographic) metric."""
    ia, ib = math.isinf(a), math.isinf(b)
    if ia or ib:
        if ia and ib:
            return 0.0
        x = b if ia else a
        return 1.0 / math.hypot(1.0, x)
    return abs(a - b) / (math.hypot(1.0, a) * math.hypot(1.0, b))


def _pairs_equal_chordal(p, q, tol) -> bool:
    return _chordal_gap(p[0], q[0]) <= tol and _chordal_gap(p[1], q[1]) <= tol


@dataclass(frozen=True)
class Window:
    """Compact disc in H2: hyperbolic center and radius."""

    center: complex
    radius: float

    def __post_init__(self):
        if complex(self.center).imag <= 0:
            raise ValueError("window center must lie in the upper half-plane")
        if not self.radius > 0:
            raise ValueError("window radius must be positive")

    @classmethod
    def around_segment(cls, seg: GeodesicSegment, margin: float = 1e-6) -> "Window":
        return cls(seg.midpoint(), seg.length / 2.0 + margin)

    def euclidean(self):
        """Euclidean center/radius of the same disc."""
        x0, y0 = complex(self.center).real, complex(self.center).imag
        return complex(x0, y0 * math.cosh(self.radius)), y0 * math.sinh(self.radius)

    def meets(self, g: Geodesic, tol: float = 1e-12) -> bool:
        z = complex(self.center)
        return distance_to_geodesic(z, g) <= self.radius + tol


@dataclass(frozen=True)
class Leaf:
    geodesic: Geodesic
    weight: complex

    def __post_init__(self):
        if self.weight == 0:
            raise ValueError("leaf weight must be nonzero")


def _canonical_pair(g: Geodesic):
    u = math.inf if g.e1.is_infinity else g.e1.value.real
    v = math.inf if g.e2.is_infinity else g.e2.value.real
    return (u, v) if u <= v else (v, u)


def _pairs_equal(p, q, tol=_MERGE_TOL) -> bool:
    def close(a, b):
        if math.isinf(a) or math.isinf(b):
            return math.isinf(a) and math.isinf(b)
        return abs(a - b) <= tol * max(1.0, abs(a), abs(b))

    return close(p[0], q[0]) and close(p[1], q[1])


def _pairs_interleave(p, q) -> bool:
    """Strict interleaving of canonical endpoint pairs on the boundary circle."""
    (a, b), (c, d) = p, q
    if math.isinf(b):
        if math.isinf(d):
            return False
        return c < a < d
    if math.isinf(d):
        return a < c < b
    return (a < c < b) != (a < d < b)


class FiniteLamination:
    """Finite measured lamination restricted to a compact window."""

    def __init__(self, leaves, window: Window, validate: bool = True,
                 merge: bool = True):
        items = []
        for lf in leaves:
            if not isinstance(lf, Leaf):
                g, w = lf
                lf = Leaf(g if isinstance(g, Geodesic) else Geodesic(*g), complex(w))
            items.append(lf)
        if merge:
            items = self._merged(items)
        self.leaves = tuple(items)
        self.window = window
        self._arr = None
        if validate:
            self.validate()

    @staticmethod
    def _merged(items):
        keyed = sorted(
            ((_canonical_pair(lf.geodesic), lf) for lf in items),
            key=lambda kv: (kv[0][0], kv[0][1]),
        )
        out = []
        for key, lf in keyed:
            if out and _pairs_equal(out[-1][0], key):
                prev_key, prev = out[-1]
                out[-1] = (prev_key, Leaf(prev.geodesic, prev.weight + lf.weight)
                           if prev.weight + lf.weight != 0 else None)
            else:
                out.append((key, lf))
        return [lf for _, lf in out if lf is not None]

    # -- array cache ----------------------------------------------------

    def arrays(self):
        """(U, V, W): canonical endpoint pairs (inf-padded) and weights."""
        if self._arr is None:
            n = len(self.leaves)
            u = np.empty(n)
            v = np.empty(n)
            w = np.empty(n, dtype=complex)
            for i, lf in enumerate(self.leaves):
                u[i], v[i] = _canonical_pair(lf.geodesic)
                w[i] = lf.weight
            self._arr = (u, v, w)
        return self._arr

    def validate(self, tol: float = BOUNDARY_TOL):
        for i, lf in enumerate(self.leaves):
            if not self.window.meets(lf.geodesic, tol=1e-9):
                raise ValueError(f"leaf {i} misses the window {self.window}")
        self.validate_disjoint()

    def validate_disjoint(self):
        # pairwise disjoint-or-equal, vectorized over the upper triangle
        u, v, _ = self.arrays()
        n = len(self.leaves)
        if n >= 2:
            fi = np.isfinite(v)
            for i in range(n - 1):
                uj, vj, fj = u[i + 1 :], v[i + 1 :], fi[i + 1 :]
                if fi[i]:
                    inside_c = (u[i] < uj) & (uj < v[i])
                    inside_d = fj & (u[i] < vj) & (vj < v[i])
                    bad = inside_c != inside_d
                else:
                    bad = fj & (uj < u[i]) & (u[i] < vj)
                if bad.any():
                    j = int(np.argmax(bad)) + i + 1
                    raise ValueError(
                        f"leaves {i} and {j} cross: "
                        f"{self.leaves[i].geodesic} / {self.leaves[j].geodesic}"
                    )

    # -- basic quantities -------------------------------------------------

    def norm(self) -> float:
        """Total variation sum of |weight|; attains the dual-norm supremum."""
        _, _, w = self.arrays()
        return float(np.abs(w).sum()) if len(self.leaves) else 0.0

    def scaled(self, factor: complex) -> "FiniteLamination":
        return FiniteLamination(
            [Leaf(lf.geodesic, factor * lf.weight) for lf in self.leaves],
            self.window, validate=False, merge=False,
        )

    def __len__(self):
        return len(self.leaves)

    def __repr__(self):
        return f"FiniteLamination({len(self.leaves)} leaves, window={self.window})"


def lamination_norm(lam: FiniteLamination) -> float:
    return lam.norm()


# ---------------------------------------------------------------------------
# crossings with a segment


@dataclass(frozen=True)
class LeafCrossing:
    index: int          # leaf index in the lamination
    weight: complex
    s: float
    flag: str | None
    side: str
    angle: float
    point: complex
    geodesic: Geodesic


def crossings(lam: FiniteLamination, seg: GeodesicSegment,
              endpoint_tol: float = ENDPOINT_TOL):
    """All leaves crossing the closed segment, ordered from start to end.

    Raises DegenerateLeaf when a leaf coincides with the carrier.
    """
    out = []
    u, v, _ = lam.arrays()
    carrier_pair = _canonical_pair(seg.carrier.unoriented())
    for i in range(len(lam.leaves)):
        if _pairs_equal((u[i], v[i]), carrier_pair):
            raise DegenerateLeaf(f"leaf {i} equals the segment carrier")
    # vectorized prefilter in the segment frame, then exact per-candidate data
    f = seg.frame
    a, b = f.a.real, f.b.real
    c, d = f.c.real, f.d.real
    with np.errstate(divide="ignore", invalid="ignore"):
        fu = np.where(np.isinf(u), _safe_div(a, c), _safe_div(a * u + b, c * u + d))
        fv = np.where(np.isinf(v), _safe_div(a, c), _safe_div(a * v + b, c * v + d))
    prod = fu * fv
    finite = np.isfinite(fu) & np.isfinite(fv)
    cand = finite & (prod < 0)
    if cand.any():
        y = np.sqrt(-prod[cand])
        slack = 2.0 * endpoint_tol
        ok = (np.log(y / seg.h_start) >= -slack) & (np.log(y / seg.h_end) <= slack)
        idx = np.nonzero(cand)[0][ok]
    else:
        idx = []
    for i in idx:
        lf = lam.leaves[int(i)]
        cr = segment_crossing(lf.geodesic, seg, endpoint_tol=endpoint_tol)
        if cr is None:
            continue
        out.append(LeafCrossing(int(i), lf.weight, cr.s, cr.flag, cr.side,
                                cr.angle, cr.point, lf.geodesic))
    out.sort(key=lambda c: (c.s, c.index))
    return out


def _safe_div(num, den):
    with np.errstate(divide="ignore", invalid="ignore"):
        r = num / den
    return np.where(np.isnan(r), np.inf, r)


def transverse_integral(lam: FiniteLamination, seg: GeodesicSegment, f=None) -> complex:
    """Weighted crossing sum with endpoint crossings counted at half weight.

    f is an optional TestFunction evaluated on the crossing data of this
    segment; it defaults to the constant one.
    """
    total = 0j
    for c in crossings(lam, seg):
        val = 1.0 if f is None else f.value_at(c.s, c.angle)
        half = 0.5 if c.flag in ("start", "end") else 1.0
        total += c.weight * val * half
    return total


def min_crossing_angle(lam: FiniteLamination, seg: GeodesicSegment):
    """Minimum unoriented crossing angle against the segment, or None."""
    cs = crossings(lam, seg)
    if not cs:
        return None
    return min(c.angle for c in cs)


# ---------------------------------------------------------------------------
# test functions and weak evaluation


class TestFunction:
    """Continuous test function parametrized by segment-crossing data.

    Either a constant on all geodesics, or a piecewise-linear profile in the
    normalized crossing parameter s of a reference segment, optionally
    multiplied by a piecewise-linear profile in the crossing angle.  Leaves
    that miss the reference segment evaluate to zero.
    """

    def __init__(self, ref_segment=None, s_nodes=None, s_values=None,
                 angle_nodes=None, angle_values=None, constant=None):
        if constant is not None:
            if ref_segment is not None:
                raise ValueError("constant test functions take no reference segment")
            self.constant = complex(constant)
            self.ref_segment = None
            return
        self.constant = None
        if ref_segment is None:
            raise ValueError("profile test functions need a reference segment")
        self.ref_segment = ref_segment
        self.s_nodes = np.asarray(s_nodes, dtype=float)
        self.s_values = np.asarray(s_values, dtype=float)
        if self.s_nodes.shape != self.s_values.shape or self.s_nodes.ndim != 1:
            raise ValueError("mismatched s profile")
        if angle_nodes is None:
            self.angle_nodes = None
            self.angle_values = None
        else:
            self.angle_nodes = np.asarray(angle_nodes, dtype=float)
            self.angle_values = np.asarray(angle_values, dtype=float)

    @classmethod
    def const(cls, value=1.0) -> "TestFunction":
        return cls(constant=value)

    @classmethod
    def hat(cls, ref_segment, center: float = 0.5, halfwidth: float = 0.5,
            angle_nodes=None, angle_values=None) -> "TestFunction":
        """Piecewise-linear bump in s, vanishing at the segment endpoints."""
        nodes = [0.0, max(0.0, center - halfwidth), center,
                 min(1.0, center + halfwidth), 1.0]
        vals = [0.0, 0.0, 1.0, 0.0, 0.0]
        return cls(ref_segment, nodes, vals, angle_nodes, angle_values)

    def value_at(self, s: float, angle: float) -> float:
        if self.constant is not None:
            return self.constant
        val = float(np.interp(s, self.s_nodes, self.s_values))
        if self.angle_nodes is not None:
            val *= float(np.interp(angle, self.angle_nodes, self.angle_values))
        return val

    def __call__(self, leaf_geodesic: Geodesic):
        if self.constant is not None:
            return self.constant
        cr = segment_crossing(leaf_geodesic, self.ref_segment)
        if cr is None:
            return 0.0
        return self.value_at(cr.s, cr.angle)


def weak_eval(lam: FiniteLamination, f: TestFunction) -> complex:
    """Integral of a test function against the lamination's atomic measure."""
    total = 0j
    for lf in lam.leaves:
        total += lf.weight * f(lf.geodesic)
    return total


# ---------------------------------------------------------------------------
# group orbits


@dataclass(frozen=True)
class OrbitSpec:
    """Group-invariant lamination data: base leaves, group, word cap."""

    base_leaves: tuple
    group: Representation
    cap: int

    def __post_init__(self):
        object.__setattr__(self, "base_leaves", tuple(self.base_leaves))
        if self.cap < 0:
            raise ValueError("cap must be nonnegative")


_INF_SNAP = 1e9  # values this large are within 1e-9 of infinity chordally


def _mobius_images(mats: np.ndarray, x: float) -> np.ndarray:
    if math.isinf(x):
        r = _safe_div(mats[:, 0, 0], mats[:, 1, 0])
    else:
        r = _safe_div(mats[:, 0, 0] * x + mats[:, 0, 1],
                      mats[:, 1, 0] * x + mats[:, 1, 1])
    return np.where(np.abs(r) > _INF_SNAP, np.inf, r)


def _window_mask(u: np.ndarray, v: np.ndarray, window: Window) -> np.ndarray:
    ec, er = window.euclidean()
    x0, y0 = ec.real, ec.imag
    fin = np.isfinite(u) & np.isfinite(v)
    with np.errstate(invalid="ignore"):
        m = 0.5 * (u + v)
        rho = 0.5 * np.abs(v - u)
        dd = np.hypot(m - x0, y0)
        circle_hit = fin & (np.abs(dd - rho) <= er * (1 + 1e-12))
    xline = np.where(np.isfinite(u), u, v)
    line_hit = (~fin) & (np.abs(xline - x0) <= er * (1 + 1e-12))
    return circle_hit | line_hit


def _segment_mask(u: np.ndarray, v: np.ndarray, seg: GeodesicSegment,
                  endpoint_tol: float = ENDPOINT_TOL) -> np.ndarray:
    f = seg.frame
    a, b, c, d = f.a.real, f.b.real, f.c.real, f.d.real
    fu = np.where(np.isinf(u), _safe_div(a, c), _safe_div(a * u + b, c * u + d))
    fv = np.where(np.isinf(v), _safe_div(a, c), _safe_div(a * v + b, c * v + d))
    prod = fu * fv
    ok = np.isfinite(fu) & np.isfinite(fv) & (prod < 0)
    y = np.sqrt(np.where(ok, -prod, 1.0))
    slack = 2.0 * endpoint_tol
    return ok & (np.log(y / seg.h_start) >= -slack) & (np.log(y / seg.h_end) <= slack)


def _dedup_pairs(u: np.ndarray, v: np.ndarray, w: np.ndarray,
                 tol=_ORBIT_DEDUP_TOL):
    """Deduplicate coincident endpoint pairs (chordal metric).

    Sorting is by chordal coordinates so that near-infinite values line up
    with exact infinities; the first pair of each coincidence group is kept.
    Word-ball images of the same geodesic can differ by ~1e-7 after Mobius
    derivative amplification, while distinct leaves meeting a common window
    stay >= 1e-4 apart, so the tolerance sits safely between the two scales.
    """
    with np.errstate(invalid="ignore"):
        cu = u / np.hypot(1.0, u)   # chordal coordinate, +-1 at infinity
        cv = v / np.hypot(1.0, v)
    cu = np.where(np.isinf(u), 1.0, cu)
    cv = np.where(np.isinf(v), 1.0, cv)
    order = np.lexsort((cv, cu))
    u, v, w = u[order], v[order], w[order]
    keep = np.ones(len(u), dtype=bool)
    last = 0
    for i in range(1, len(u)):
        if _pairs_equal_chordal((u[last], v[last]), (u[i], v[i]), tol):
            keep[i] = False
        else:
            last = i
    return u[keep], v[keep], w[keep]


def orbit_instantiate(spec: OrbitSpec, target, cap_limit: int = _kernels.MAX_BALL_CAP,
                      validate: bool = True) -> FiniteLamination:
    """Translates of the base leaves (word length <= cap) meeting the target.

    target is a Window or a GeodesicSegment.  Coincident translates are kept
    once with the weight of the first base leaf that produced them; weights
    are never added, matching the orbit reading of an invariant lamination.
    """
    if spec.cap > cap_limit:
        raise CapExceeded(f"orbit cap {spec.cap} exceeds limit {cap_limit}")
    if not spec.group.is_real():
        raise ValueError("orbit instantiation requires a real (Fuchsian) group")
    if isinstance(target, Window):
        window = target
        mask_fn = lambda u, v: _window_mask(u, v, window)
    else:
        seg = target
        window = Window.around_segment(seg)
        mask_fn = lambda u, v: _segment_mask(u, v, seg)

    base = []
    for lf in spec.base_leaves:
        if not isinstance(lf, Leaf):
            g, wt = lf
            lf = Leaf(g if isinstance(g, Geodesic) else Geodesic(*g), complex(wt))
        base.append(lf)

    hits_u, hits_v, hits_w = [], [], []
    base_uv = [(_canonical_pair(lf.geodesic), lf.weight) for lf in base]
    for (u0, v0), wt in base_uv:
        arr_u = np.array([u0])
        arr_v = np.array([v0])
        m = mask_fn(arr_u, arr_v)
        if m[0]:
            hits_u.append(arr_u)
            hits_v.append(arr_v)
            hits_w.append(np.array([wt], dtype=complex))
    if spec.cap >= 1:
        gens = spec.group.letter_array()
        if gens.dtype != np.float64:
            raise ValueError("orbit instantiation requires real generator matrices")
        for _level, mats, _last in _kernels.iter_ball_levels(gens, spec.cap):
            for (u0, v0), wt in base_uv:
                iu = _mobius_images(mats, u0)
                iv = _mobius_images(mats, v0)
                lo = np.minimum(iu, iv)
                hi = np.maximum(iu, iv)
                m = mask_fn(lo, hi)
                if m.any():
                    hits_u.append(lo[m])
                    hits_v.append(hi[m])
                    hits_w.append(np.full(int(m.sum()), wt, dtype=complex))
    if not hits_u:
        return FiniteLamination([], window, validate=False)
    u = np.concatenate(hits_u)
    v = np.concatenate(hits_v)
    w = np.concatenate(hits_w)
    u, v, w = _dedup_pairs(u, v, w)
    leaves = [
        Leaf(Geodesic(ui if math.isfinite(ui) else None, vi if math.isfinite(vi) else None), wi)
        for ui, vi, wi in zip(u, v, w)
    ]
    return FiniteLamination(leaves, window, validate=validate, merge=False)


def is_translate_disjoint(g: Geodesic, rep: Representation, cap: int,
                          cap_limit: int = _kernels.MAX_BALL_CAP) -> bool:
    """True when no nontrivial word of length <= cap maps g across itself.

    Checks cross(g, w(g)) = none or w(g) = g for every word in the ball; this
    is the word-ball truncation of the self-disjointness condition defining
    simple leaves of invariant laminations.
    """
    if cap > cap_limit:
        raise CapExceeded(f"cap {cap} exceeds limit {cap_limit}")
    if not rep.is_real():
        raise ValueError("requires a real (Fuchsian) representation")
    u0, v0 = _canonical_pair(g)
    gens = rep.letter_array()
    for _level, mats, _last in _kernels.iter_ball_levels(gens, cap):
        iu = _mobius_images(mats, u0)
        iv = _mobius_images(mats, v0)
        lo = np.minimum(iu, iv)
        hi = np.maximum(iu, iv)
        if math.isinf(v0):
            fin = np.isfinite(hi)
            inter = fin & (lo < u0) & (u0 < hi)
        else:
            in_c = (u0 < lo) & (lo < v0)
            in_d = np.isfinite(hi) & (u0 < hi) & (hi < v0)
            inter = in_c != in_d
        if inter.any():
            # discard numerically coincident translates before declaring a crossing
            idx = np.nonzero(inter)[0]
            for i in idx:
                if not _pairs_equal_chordal((lo[i], hi[i]), (u0, v0), _ORBIT_DEDUP_TOL):
                    return False
    return True


def joint_support_laminar(nu1: FiniteLamination, nu2: FiniteLamination) -> bool:
    """Whether the union of two positive laminations is still a lamination.

    Both arguments must have positive real weights; returns True when the
    union of supports is pairwise disjoint-or-equal.
    """
    for lam in (nu1, nu2):
        for lf in lam.leaves:
            wt = complex(lf.weight)
            if wt.imag != 0 or wt.real <= 0:
                raise ValueError("joint_support_laminar requires positive real weights")
    window = nu1.window if nu1.window.radius >= nu2.window.radius else nu2.window
    merged = list(nu1.leaves) + list(nu2.leaves)
    union = FiniteLamination(merged, window, validate=False, merge=True)
    try:
        union.validate_disjoint()
    except ValueError:
        return False
    return True
