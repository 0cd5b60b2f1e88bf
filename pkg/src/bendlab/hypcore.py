"""Upper half-plane and half-space geometry.

Models used throughout the package:

* H2 is the upper half-plane {z : Im z > 0} with ideal boundary R u {oo}.
* H3 is upper half-space {(w, t) : w in C, t > 0} with ideal boundary
  C u {oo}; H2 embeds as {(x, y) : y > 0} via z = x + iy -> (x, y).

Isometries are unit-determinant 2x2 complex matrices acting as Mobius
transformations on the boundary and by Poincare extension on H3.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .errors import DegenerateImage, DegenerateLeaf, NotLoxodromic

# Default tolerances.  Boundary equality is the loosest layer; matrix
# identities get an order of magnitude of headroom below the 1e-9
# acceptance thresholds used by the experiment suites.
BOUNDARY_TOL = 1e-12
MATRIX_TOL = 1e-10
ENDPOINT_TOL = 1e-9


def _close(a: complex, b: complex, tol: float) -> bool:
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


# ---------------------------------------------------------------------------
# boundary points


class BoundaryPoint:
    """Point of the ideal boundary: a finite complex value or infinity.

    Infinity is represented exactly by a flag, never by a large float.
    Equality is exact on the flag and tolerance-based on finite values.
    """

    __slots__ = ("value", "is_infinity")

    def __init__(self, value: complex = 0j, infinity: bool = False):
        self.is_infinity = bool(infinity)
        self.value = complex(value) if not infinity else 0j

    @classmethod
    def inf(cls) -> "BoundaryPoint":
        return cls(infinity=True)

    def is_real(self, tol: float = BOUNDARY_TOL) -> bool:
        return self.is_infinity or abs(self.value.imag) <= tol

    def close_to(self, other: "BoundaryPoint", tol: float = BOUNDARY_TOL) -> bool:
        if self.is_infinity or other.is_infinity:
            return self.is_infinity and other.is_infinity
        return _close(self.value, other.value, tol)

    def __eq__(self, other):
        if not isinstance(other, BoundaryPoint):
            return NotImplemented
        return self.close_to(other)

    def __repr__(self):
        return "BoundaryPoint(inf)" if self.is_infinity else f"BoundaryPoint({self.value})"


INFINITY = BoundaryPoint.inf()


def as_boundary(x) -> BoundaryPoint:
    """Coerce a float/complex/inf/BoundaryPoint to a BoundaryPoint."""
    if isinstance(x, BoundaryPoint):
        return x
    if x is None:
        return BoundaryPoint.inf()
    if isinstance(x, str):
        if x in ("inf", "oo"):
            return BoundaryPoint.inf()
        return BoundaryPoint(complex(x))
    if isinstance(x, (int, float)) and math.isinf(x):
        return BoundaryPoint.inf()
    return BoundaryPoint(complex(x))


def _sort_key(p: BoundaryPoint):
    # total order on the boundary: finite values by (re, im), infinity last
    if p.is_infinity:
        return (1, 0.0, 0.0)
    return (0, p.value.real, p.value.imag)


# ---------------------------------------------------------------------------
# matrices


class UnimodularMatrix:
    """2x2 complex matrix of determinant one.

    Raw entries are rescaled to unit determinant on construction; products
    and inverses of unimodular matrices skip the rescaling so that exact
    identities (e.g. A @ A.inverse()) survive in floating point.
    """

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a, b, c, d, *, normalize: bool = True):
        a, b, c, d = complex(a), complex(b), complex(c), complex(d)
        if normalize:
            det = a * d - b * c
            if det == 0 or not (cmath.isfinite(det)):
                raise ValueError(f"singular or non-finite matrix, det={det}")
            if abs(det - 1.0) > 1e-15:
                s = cmath.sqrt(det)
                a, b, c, d = a / s, b / s, c / s, d / s
        self.a, self.b, self.c, self.d = a, b, c, d

    # -- constructors -------------------------------------------------

    @classmethod
    def identity(cls) -> "UnimodularMatrix":
        return cls(1.0, 0.0, 0.0, 1.0, normalize=False)

    @classmethod
    def from_array(cls, arr, *, normalize: bool = True) -> "UnimodularMatrix":
        return cls(arr[0][0], arr[0][1], arr[1][0], arr[1][1], normalize=normalize)

    # -- algebra ------------------------------------------------------

    def __matmul__(self, other: "UnimodularMatrix") -> "UnimodularMatrix":
        return UnimodularMatrix(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
            normalize=False,
        )

    def inverse(self) -> "UnimodularMatrix":
        return UnimodularMatrix(self.d, -self.b, -self.c, self.a, normalize=False)

    def __neg__(self) -> "UnimodularMatrix":
        return UnimodularMatrix(-self.a, -self.b, -self.c, -self.d, normalize=False)

    @property
    def trace(self) -> complex:
        return self.a + self.d

    @property
    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    def norm(self) -> float:
        """Row-sum operator norm max(|a|+|b|, |c|+|d|) for the sup norm on C^2."""
        return max(abs(self.a) + abs(self.b), abs(self.c) + abs(self.d))

    def canonical_sign(self) -> "UnimodularMatrix":
        """The lift with Re(trace) >= 0; purely imaginary traces take Im >= 0."""
        t = self.trace
        if t.real < 0 or (t.real == 0 and t.imag < 0):
            return -self
        return self

    def conjugate_entries(self) -> "UnimodularMatrix":
        return UnimodularMatrix(
            self.a.conjugate(), self.b.conjugate(), self.c.conjugate(), self.d.conjugate(),
            normalize=False,
        )

    def is_real(self, tol: float = BOUNDARY_TOL) -> bool:
        return max(abs(self.a.imag), abs(self.b.imag), abs(self.c.imag), abs(self.d.imag)) <= tol

    # -- actions ------------------------------------------------------

    def apply_boundary(self, p: BoundaryPoint) -> BoundaryPoint:
        if p.is_infinity:
            if self.c == 0:
                return BoundaryPoint.inf()
            return BoundaryPoint(self.a / self.c)
        den = self.c * p.value + self.d
        if den == 0:
            return BoundaryPoint.inf()
        return BoundaryPoint((self.a * p.value + self.b) / den)

    def apply_h2(self, z: complex) -> complex:
        """Action on an interior point of H2 (requires real entries up to tol)."""
        return (self.a * z + self.b) / (self.c * z + self.d)

    def apply_h3(self, p: "H3Point") -> "H3Point":
        """Poincare extension of the Mobius action to upper half-space."""
        cw_d = self.c * p.w + self.d
        den = abs(cw_d) ** 2 + abs(self.c) ** 2 * p.t**2
        w = ((self.a * p.w + self.b) * cw_d.conjugate() + self.a * self.c.conjugate() * p.t**2) / den
        return H3Point(w, p.t / den)

    def as_tuple(self):
        return (self.a, self.b, self.c, self.d)

    def entries_equal(self, other: "UnimodularMatrix") -> bool:
        """Bitwise entry equality (used to short-circuit exact-zero diagnostics)."""
        return self.as_tuple() == other.as_tuple()

    def __repr__(self):
        return f"UnimodularMatrix({self.a}, {self.b}, {self.c}, {self.d})"


def matrix_norm(m: UnimodularMatrix) -> float:
    return m.norm()


def norm_diff(m1: UnimodularMatrix, m2: UnimodularMatrix) -> float:
    return UnimodularMatrix(
        m1.a - m2.a, m1.b - m2.b, m1.c - m2.c, m1.d - m2.d, normalize=False
    ).norm()


def norm_diff_pm(m1: UnimodularMatrix, m2: UnimodularMatrix) -> float:
    """Distance up to the sign of the lift: min(|m1 - m2|, |m1 + m2|)."""
    return min(norm_diff(m1, m2), norm_diff(m1, -m2))


# ---------------------------------------------------------------------------
# geodesics


class Geodesic:
    """Unoriented complete geodesic: an unordered pair of distinct boundary points.

    Endpoints are stored sorted by the total order (finite values ascending,
    infinity last) so equal geodesics compare and merge deterministically.
    """

    __slots__ = ("e1", "e2")

    def __init__(self, p, q):
        p, q = as_boundary(p), as_boundary(q)
        if p.close_to(q):
            raise ValueError(f"degenerate geodesic: {p} == {q}")
        if _sort_key(p) <= _sort_key(q):
            self.e1, self.e2 = p, q
        else:
            self.e1, self.e2 = q, p

    def endpoints(self):
        return (self.e1, self.e2)

    def is_real(self, tol: float = BOUNDARY_TOL) -> bool:
        return self.e1.is_real(tol) and self.e2.is_real(tol)

    def same_as(self, other: "Geodesic", tol: float = BOUNDARY_TOL) -> bool:
        return self.e1.close_to(other.e1, tol) and self.e2.close_to(other.e2, tol)

    def __eq__(self, other):
        if not isinstance(other, Geodesic):
            return NotImplemented
        return self.same_as(other)

    def __repr__(self):
        return f"Geodesic({self.e1}, {self.e2})"


class OrientedGeodesic:
    """Ordered pair of distinct boundary points (source, target)."""

    __slots__ = ("source", "target")

    def __init__(self, source, target):
        self.source = as_boundary(source)
        self.target = as_boundary(target)
        if self.source.close_to(self.target):
            raise ValueError("degenerate oriented geodesic")

    def reversed(self) -> "OrientedGeodesic":
        return OrientedGeodesic(self.target, self.source)

    def unoriented(self) -> Geodesic:
        return Geodesic(self.source, self.target)

    def __repr__(self):
        return f"OrientedGeodesic({self.source} -> {self.target})"


def geodesic(p, q) -> Geodesic:
    return Geodesic(p, q)


def oriented(p, q) -> OrientedGeodesic:
    return OrientedGeodesic(p, q)


def _halfcircle_params(g) -> tuple:
    """(kind, data) for a real geodesic: ('circle', center, radius) or ('line', x)."""
    p, q = (g.source, g.target) if isinstance(g, OrientedGeodesic) else (g.e1, g.e2)
    if p.is_infinity:
        return ("line", q.value.real)
    if q.is_infinity:
        return ("line", p.value.real)
    u, v = p.value.real, q.value.real
    return ("circle", (u + v) / 2.0, abs(v - u) / 2.0)


# ---------------------------------------------------------------------------
# isometries with a given axis


def axis_isometry(axis: OrientedGeodesic, z: complex) -> UnimodularMatrix:
    """Loxodromic element with the given oriented axis and complex displacement.

    Returns M diag(e^{z/2}, e^{-z/2}) M^{-1} for any M with M(0) = source and
    M(oo) = target; the closed form below is independent of that choice.  For
    Re z > 0 the target endpoint is attracting.  The trace is 2 cosh(z/2).
    """
    ez = cmath.exp(z / 2.0)
    em = cmath.exp(-z / 2.0)
    s, t = axis.source, axis.target
    if s.is_infinity:
        v = t.value
        return UnimodularMatrix(em, v * (ez - em), 0.0, ez, normalize=False)
    if t.is_infinity:
        u = s.value
        return UnimodularMatrix(ez, u * (em - ez), 0.0, em, normalize=False)
    u, v = s.value, t.value
    w = v - u
    return UnimodularMatrix(
        (v * ez - u * em) / w,
        u * v * (em - ez) / w,
        (ez - em) / w,
        (v * em - u * ez) / w,
        normalize=False,
    )


def complex_displacement(m: UnimodularMatrix, tol: float = BOUNDARY_TOL):
    """Oriented axis and displacement z of a loxodromic matrix.

    Branch: Re z >= 0 and Im z in (-pi, pi], which makes the decomposition the
    two-sided inverse of axis_isometry on that domain.  Raises NotLoxodromic
    for identity, elliptic and parabolic input (trace^2 in [0, 4]).
    """
    tr = m.trace
    t2 = tr * tr
    if abs(t2.imag) <= tol and -tol <= t2.real <= 4.0 + tol:
        raise NotLoxodromic(f"trace {tr} has trace^2 in [0, 4]")
    z = cmath.acosh((t2 - 2.0) / 2.0)
    if z.imag <= -math.pi:
        z = complex(z.real, z.imag + 2.0 * math.pi)
    if z.real <= 0.0:
        raise NotLoxodromic(f"zero translation part for trace {tr}")

    scale = abs(m.a) + abs(m.d)
    if abs(m.c) <= 1e-30 * max(1.0, scale):
        other = m.b / (m.d - m.a)  # d != a, else parabolic (caught above)
        if abs(m.a) > 1.0:
            src, tgt = BoundaryPoint(other), BoundaryPoint.inf()
        else:
            src, tgt = BoundaryPoint.inf(), BoundaryPoint(other)
        return OrientedGeodesic(src, tgt), z

    disc = cmath.sqrt(t2 - 4.0)
    p1 = (m.a - m.d + disc) / (2.0 * m.c)
    p2 = (m.a - m.d - disc) / (2.0 * m.c)
    # attracting fixed point has |c w + d| > 1 (derivative modulus < 1)
    if abs(m.c * p1 + m.d) > abs(m.c * p2 + m.d):
        src, tgt = BoundaryPoint(p2), BoundaryPoint(p1)
    else:
        src, tgt = BoundaryPoint(p1), BoundaryPoint(p2)
    return OrientedGeodesic(src, tgt), z


# ---------------------------------------------------------------------------
# points, distance, frames


@dataclass(frozen=True)
class H3Point:
    """Point of upper half-space: horizontal complex part w and height t > 0."""

    w: complex
    t: float

    def __post_init__(self):
        if not self.t > 0:
            raise ValueError(f"height must be positive, got {self.t}")


H3_BASE = H3Point(0j, 1.0)  # the reference point above the origin


def embed_h2(z: complex) -> H3Point:
    if z.imag <= 0:
        raise ValueError(f"not an interior point of H2: {z}")
    return H3Point(complex(z.real, 0.0), z.imag)


def distance_h2(p: complex, q: complex) -> float:
    if p.imag <= 0 or q.imag <= 0:
        raise ValueError("points must lie in the upper half-plane")
    x = 1.0 + (abs(p - q) ** 2) / (2.0 * p.imag * q.imag)
    return math.acosh(max(1.0, x))

def distance_h3(p: H3Point, q: H3Point) -> float:
    x = 1.0 + (abs(p.w - q.w) ** 2 + (p.t - q.t) ** 2) / (2.0 * p.t * q.t)
    return math.acosh(max(1.0, x))


def distance(p, q) -> float:
    """Hyperbolic distance; complex arguments are H2 points, H3Point otherwise."""
    if isinstance(p, H3Point) or isinstance(q, H3Point):
        p = p if isinstance(p, H3Point) else embed_h2(complex(p))
        q = q if isinstance(q, H3Point) else embed_h2(complex(q))
        return distance_h3(p, q)
    return distance_h2(complex(p), complex(q))


def distance_to_geodesic(z: complex, g) -> float:
    """Distance from an interior H2 point to a real geodesic."""
    kind, *data = _halfcircle_params(g)
    if kind == "line":
        return math.asinh(abs(z.real - data[0]) / z.imag)
    center, radius = data
    return math.asinh(abs(abs(z - center) ** 2 - radius**2) / (2.0 * radius * z.imag))


def geodesic_frame(g) -> UnimodularMatrix:
    """Matrix sending source -> 0 and target -> oo.

    For real endpoints the frame is real and preserves the upper half-plane.
    For complex endpoints (H3 geodesics) any unit-determinant choice serves.
    """
    p, q = (g.source, g.target) if isinstance(g, OrientedGeodesic) else (g.e1, g.e2)
    if p.is_infinity:  # w -> -1/(w - q)
        return UnimodularMatrix(0.0, -1.0, 1.0, -q.value, normalize=False)
    if q.is_infinity:  # w -> w - p
        return UnimodularMatrix(1.0, -p.value, 0.0, 1.0, normalize=False)
    u, v = p.value, q.value
    if u.imag == 0 and v.imag == 0 and u.real < v.real:
        # flip sign so the real frame has positive determinant
        m = UnimodularMatrix(-1.0, u, 1.0, -v, normalize=True)
    else:
        m = UnimodularMatrix(1.0, -u, 1.0, -v, normalize=True)
    return m


def standard_height(frame: UnimodularMatrix, z: complex) -> float:
    """Height |frame(z)| of an H2 point mapped onto the axis (0, oo)."""
    return abs(frame.apply_h2(z))


# ---------------------------------------------------------------------------
# crossings


@dataclass(frozen=True)
class CrossPoint:
    point: complex
    angle: float  # unoriented, in [0, pi/2]


def _interleaved(g1, g2, tol: float = BOUNDARY_TOL) -> bool:
    """Strict endpoint interleaving on the circle R u {oo}; shared endpoints fail."""
    a, b = g1.e1, g1.e2
    c, d = g2.e1, g2.e2
    for p in (c, d):
        for q in (a, b):
            if p.close_to(q, tol):
                return False
    if b.is_infinity:  # vertical line at a
        if d.is_infinity:
            return False
        x = a.value.real
        return c.value.real < x < d.value.real
    lo, hi = a.value.real, b.value.real
    inside = 0
    for p in (c, d):
        if not p.is_infinity and lo < p.value.real < hi:
            inside += 1
    return inside == 1


def cross(g1: Geodesic, g2: Geodesic, tol: float = BOUNDARY_TOL):
    """Transverse intersection of two real geodesics, or None.

    Returns a CrossPoint with the unoriented angle in [0, pi/2], computed by
    the inter-circle angle formula cos(angle) = |d^2 - r1^2 - r2^2| / (2 r1 r2)
    after reducing vertical lines.  Identical and asymptotic pairs give None.
    """
    if not (g1.is_real() and g2.is_real()):
        raise ValueError("cross() is defined for geodesics with real endpoints")
    if g1.same_as(g2, tol):
        return None
    if not _interleaved(g1, g2, tol):
        return None
    k1 = _halfcircle_params(g1)
    k2 = _halfcircle_params(g2)
    if k1[0] == "line" and k2[0] == "line":
        return None
    if k1[0] == "line" or k2[0] == "line":
        (_, x), (_, center, radius) = (k1, k2) if k1[0] == "line" else (k2, k1)
        y2 = radius**2 - (x - center) ** 2
        if y2 <= 0:
            return None
        cosang = min(1.0, abs(x - center) / radius)
        return CrossPoint(complex(x, math.sqrt(y2)), math.acos(cosang))
    _, m1, r1 = k1
    _, m2, r2 = k2
    if m1 == m2:
        return None  # concentric half-circles never cross
    x = ((r1**2 - r2**2) / (m2 - m1) + m1 + m2) / 2.0
    y2 = r1**2 - (x - m1) ** 2
    if y2 <= 0:
        return None
    dd = abs(m2 - m1)
    cosang = min(1.0, abs(dd**2 - r1**2 - r2**2) / (2.0 * r1 * r2))
    return CrossPoint(complex(x, math.sqrt(y2)), math.acos(cosang))


# ---------------------------------------------------------------------------
# segments


class GeodesicSegment:
    """Closed geodesic segment between two interior points of H2."""

    __slots__ = ("start", "end", "carrier", "frame", "h_start", "h_end", "length")

    def __init__(self, start: complex, end: complex):
        start, end = complex(start), complex(end)
        if start.imag <= 0 or end.imag <= 0:
            raise ValueError("segment endpoints must lie in the upper half-plane")
        if abs(start - end) <= 1e-15 * max(1.0, abs(start)):
            raise ValueError("degenerate segment")
        self.start, self.end = start, end
        self.carrier = self._carrier_oriented()
        self.frame = geodesic_frame(self.carrier)
        self.h_start = standard_height(self.frame, start)
        self.h_end = standard_height(self.frame, end)
        self.length = abs(math.log(self.h_end / self.h_start))

    def _carrier_oriented(self) -> OrientedGeodesic:
        z1, z2 = self.start, self.end
        scale = max(1.0, abs(z1), abs(z2))
        if abs(z1.real - z2.real) <= 1e-14 * scale:
            x = 0.5 * (z1.real + z2.real)
            if z2.imag > z1.imag:
                return OrientedGeodesic(x, INFINITY)
            return OrientedGeodesic(INFINITY, x)
        center = (abs(z2) ** 2 - abs(z1) ** 2) / (2.0 * (z2.real - z1.real))
        radius = abs(z1 - center)
        # the endpoint ahead of the walk start -> end
        if z2.real > z1.real:
            ahead, behind = center + radius, center - radius
        else:
            ahead, behind = center - radius, center + radius
        # walking "uphill" over the circle top flips which endpoint is ahead
        # only via the real coordinate ordering used above, which is exact.
        return OrientedGeodesic(behind, ahead)

    def reversed(self) -> "GeodesicSegment":
        return GeodesicSegment(self.end, self.start)

    def midpoint(self) -> complex:
        return self.point_at(0.5)

    def point_at(self, s: float) -> complex:
        """Interior point at normalized arc-length parameter s in [0, 1]."""
        h = self.h_start * math.exp(s * math.log(self.h_end / self.h_start))
        return self.frame.inverse().apply_h2(complex(0.0, h))

    def __repr__(self):
        return f"GeodesicSegment({self.start} -> {self.end})"


@dataclass(frozen=True)
class SegmentCrossing:
    """Crossing datum of a geodesic with an oriented segment.

    s is the normalized arc-length parameter, flag is one of
    None / 'start' / 'end', side tells on which side of the oriented segment
    the canonical first endpoint of the geodesic lies ('left' is the side a
    walker from start to end has on their left), angle is unoriented.
    """

    s: float
    flag: str | None
    side: str
    angle: float
    point: complex


def segment_crossing(leaf: Geodesic, seg: GeodesicSegment,
                     endpoint_tol: float = ENDPOINT_TOL):
    """Crossing of a geodesic with a closed segment, or None.

    Raises DegenerateLeaf when the geodesic coincides with the carrier.
    """
    if leaf.same_as(seg.carrier.unoriented()):
        raise DegenerateLeaf(f"{leaf} equals the segment carrier")
    f = seg.frame
    p1 = f.apply_boundary(leaf.e1)
    p2 = f.apply_boundary(leaf.e2)
    if p1.is_infinity or p2.is_infinity:
        return None  # asymptotic to the carrier
    e1, e2 = p1.value.real, p2.value.real
    if e1 == 0 or e2 == 0 or (e1 < 0) == (e2 < 0):
        return None  # does not cross the carrier transversally
    y = math.sqrt(-e1 * e2)
    d_start = abs(math.log(y / seg.h_start))
    d_end = abs(math.log(y / seg.h_end))
    s = math.log(y / seg.h_start) / math.log(seg.h_end / seg.h_start)
    if d_start <= endpoint_tol:
        flag, s = "start", 0.0
    elif d_end <= endpoint_tol:
        flag, s = "end", 1.0
    elif 0.0 < s < 1.0:
        flag = None
    else:
        return None
    side = "left" if e1 < 0 else "right"
    cosang = min(1.0, abs(e1 + e2) / abs(e1 - e2))
    point = f.inverse().apply_h2(complex(0.0, y))
    return SegmentCrossing(s, flag, side, math.acos(cosang), point)


def orient_crossing_leaf(leaf: Geodesic, crossing: SegmentCrossing) -> OrientedGeodesic:
    """Orient a crossing leaf by the bending convention.

    The leaf is oriented so that its target endpoint lies on the right-hand
    side of the oriented segment; with this choice the single leaf of the
    shrinking two-leaf family evaluated over [e^{i pi/4}, i] produces a matrix
    converging to diag(e^{1/2}, e^{-1/2}).
    """
    if crossing.side == "right":
        return OrientedGeodesic(leaf.e2, leaf.e1)
    return OrientedGeodesic(leaf.e1, leaf.e2)


# ---------------------------------------------------------------------------
# solid cylinders


class SupportDisc:
    """Ideal-boundary disc of a solid cylinder, held as a pullback test.

    membership(p) pulls p back through the cylinder frame and compares |p|
    to the disc parameter; for the core-source disc the parameter is
    tanh(r/2), for the core-target disc coth(r/2).
    """

    __slots__ = ("frame", "param", "around_target")

    def __init__(self, frame: UnimodularMatrix, param: float, around_target: bool):
        self.frame = frame
        self.param = param
        self.around_target = around_target

    def contains(self, p, tol: float = BOUNDARY_TOL) -> bool:
        q = self.frame.apply_boundary(as_boundary(p))
        if q.is_infinity:
            return self.around_target
        mod = abs(q.value)
        if self.around_target:
            return mod * (1.0 + tol) >= self.param if self.param < math.inf else False
        return mod <= self.param * (1.0 + tol) + tol


class SolidCylinder:
    """Union of geodesics orthogonal to a hyperbolic disc.

    The disc has radius r (hyperbolic), is orthogonal to the core geodesic and
    centered at the basepoint.  In the standardized frame where the core is
    (0, oo) and the basepoint is (0, 0, 1), the ideal boundary of the cylinder
    consists of the discs

        D1 = {|w| <= tanh(r/2)}       (around the core source)
        D2 = {|w| >= coth(r/2)}       (around the core target)

    Derivation: the disc lies on the unit hemisphere; a geodesic orthogonal to
    the hemisphere is invariant under inversion in the unit sphere, so its
    endpoints are w and 1/conj(w); if it meets the hemisphere at distance rho
    from (0,0,1), solving |w| + 1/|w| = 2/tanh(rho) gives |w| = tanh(rho/2).
    Membership of a geodesic is defined as "one endpoint in D1, the other in
    D2", which matches the supported-by-two-discs description.
    """

    __slots__ = ("core", "basepoint", "radius", "frame", "_t1")

    def __init__(self, core: OrientedGeodesic, basepoint, radius: float):
        if radius < 0:
            raise ValueError("radius must be nonnegative")
        self.core = core
        if not isinstance(basepoint, H3Point):
            basepoint = embed_h2(complex(basepoint))
        self.basepoint = basepoint
        self.radius = float(radius)
        f0 = geodesic_frame(core)
        q = f0.apply_h3(basepoint)
        lam = math.hypot(abs(q.w), q.t)
        if abs(q.w) > 1e-8 * lam:
            raise ValueError("basepoint does not lie on the core")
        rt = math.sqrt(lam)
        self.frame = UnimodularMatrix(1.0 / rt, 0.0, 0.0, rt, normalize=False) @ f0
        self._t1 = math.tanh(self.radius / 2.0)

    def supporting_discs(self):
        t1 = self._t1
        t2 = math.inf if t1 == 0 else 1.0 / t1
        return (
            SupportDisc(self.frame, t1, around_target=False),
            SupportDisc(self.frame, t2, around_target=True),
        )

    def _pulled_moduli(self, g: Geodesic):
        q1 = self.frame.apply_boundary(g.e1)
        q2 = self.frame.apply_boundary(g.e2)
        m1 = math.inf if q1.is_infinity else abs(q1.value)
        m2 = math.inf if q2.is_infinity else abs(q2.value)
        return min(m1, m2), max(m1, m2)

    def contains(self, g: Geodesic, tol: float = BOUNDARY_TOL) -> bool:
        lo, hi = self._pulled_moduli(g)
        t1 = self._t1
        if t1 == 0:
            return lo <= tol and hi == math.inf
        return lo <= t1 * (1.0 + tol) + tol and hi * (1.0 + tol) >= 1.0 / t1

    def min_radius(self, g: Geodesic) -> float:
        """Smallest radius at which this cylinder (same core/base) holds g."""
        lo, hi = self._pulled_moduli(g)
        r1 = 0.0 if lo == 0.0 else (math.inf if lo >= 1.0 else 2.0 * math.atanh(lo))
        r2 = 0.0 if hi == math.inf else (math.inf if hi <= 1.0 else 2.0 * math.atanh(1.0 / hi))
        return max(r1, r2)


# ---------------------------------------------------------------------------
# boundary transfers


class GeodesicTransfer:
    """Boundary correspondence carrying H2 geodesics to H3 geodesics.

    Kinds: 'identity', 'mobius' (a fixed unimodular matrix) and 'table'
    (an injective boundary map sampled on a finite real grid, interpolated
    linearly in the real and imaginary parts, fixing infinity).
    """

    __slots__ = ("kind", "matrix", "xs", "ys")

    def __init__(self, kind: str = "identity", matrix: UnimodularMatrix | None = None,
                 xs=None, ys=None):
        if kind not in ("identity", "mobius", "table"):
            raise ValueError(f"unknown transfer kind {kind!r}")
        self.kind = kind
        self.matrix = matrix
        self.xs = None
        self.ys = None
        if kind == "mobius" and matrix is None:
            raise ValueError("mobius transfer requires a matrix")
        if kind == "table":
            import numpy as np

            xs = np.asarray(xs, dtype=float)
            ys = np.asarray(ys, dtype=complex)
            if xs.ndim != 1 or xs.shape != ys.shape or xs.size < 2:
                raise ValueError("table transfer needs matching 1-d grids")
            if not np.all(np.diff(xs) > 0):
                raise ValueError("table grid must be strictly increasing")
            self.xs, self.ys = xs, ys

    @classmethod
    def identity(cls) -> "GeodesicTransfer":
        return cls("identity")

    @classmethod
    def mobius(cls, matrix: UnimodularMatrix) -> "GeodesicTransfer":
        return cls("mobius", matrix=matrix)

    @classmethod
    def table(cls, xs, ys) -> "GeodesicTransfer":
        return cls("table", xs=xs, ys=ys)

    @property
    def is_identity(self) -> bool:
        return self.kind == "identity"

    def apply_point(self, p: BoundaryPoint) -> BoundaryPoint:
        if self.kind == "identity":
            return p
        if self.kind == "mobius":
            return self.matrix.apply_boundary(p)
        if p.is_infinity:
            return p
        import numpy as np

        x = p.value.real
        xs, ys = self.xs, self.ys
        if x <= xs[0]:  # continue with the boundary slope
            slope = (ys[1] - ys[0]) / (xs[1] - xs[0])
            return BoundaryPoint(ys[0] + slope * (x - xs[0]))
        if x >= xs[-1]:
            slope = (ys[-1] - ys[-2]) / (xs[-1] - xs[-2])
            return BoundaryPoint(ys[-1] + slope * (x - xs[-1]))
        re = np.interp(x, xs, ys.real)
        im = np.interp(x, xs, ys.imag)
        return BoundaryPoint(complex(re, im))

    def apply_oriented(self, g: OrientedGeodesic, tol: float = BOUNDARY_TOL) -> OrientedGeodesic:
        u = self.apply_point(g.source)
        v = self.apply_point(g.target)
        if u.close_to(v, tol):
            raise DegenerateImage(f"transfer collapsed the endpoints of {g}")
        return OrientedGeodesic(u, v)

    def apply_geodesic(self, g: Geodesic, tol: float = BOUNDARY_TOL) -> Geodesic:
        if self.kind == "identity":
            return g
        u = self.apply_point(g.e1)
        v = self.apply_point(g.e2)
        if u.close_to(v, tol):
            raise DegenerateImage(f"transfer collapsed the endpoints of {g}")
        return Geodesic(u, v)


def transfer(phi: GeodesicTransfer, g):
    """Endpoint-wise image of a geodesic under a boundary transfer."""
    if isinstance(g, OrientedGeodesic):
        return phi.apply_oriented(g)
    return phi.apply_geodesic(g)
