"""Bending cocycles and the partition approximation machinery.

Central objects:

* bending_cocycle: the ordered product of axis isometries over the leaves
  crossing a segment, with half weights at the endpoints.
* bend: left-multiplies generator images by their cocycles.
* PartitionBundle: every artifact of the equal-subdivision approximation
  scheme for one generator and one m (consolidated factors, node factors,
  head/tail window splits, products and the measured cylinder radius).
* conjugated_distance: compares two bundle families after conjugating by
  the head-window factor quotient of the first generator.
* bending_vector_field / holomorphy_residual: t-derivatives of word traces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import (
    ContextValidationError,
    MismatchedContexts,
    NonConvergentDifference,
)
from .hypcore import (
    ENDPOINT_TOL,
    Geodesic,
    GeodesicSegment,
    GeodesicTransfer,
    H3Point,
    OrientedGeodesic,
    UnimodularMatrix,
    axis_isometry,
    cross,
    distance_h2,
    distance_to_geodesic,
    embed_h2,
    geodesic_frame,
    norm_diff,
    orient_crossing_leaf,
)
from .fuchsian import Representation, parse_word
from .laminations import (
    FiniteLamination,
    OrbitSpec,
    Window,
    _mobius_images,
    crossings,
    orbit_instantiate,
)


# ---------------------------------------------------------------------------
# bending context


class BendingContext:
    """Base representation, a basepoint in general position, and derived data.

    The basepoint must stay clear of the axes of the generators and of their
    conjugates up to the validation cap; theta is the smallest angle at the
    basepoint between the carriers of [g^-1 x, x] and [x, g x], and d_max /
    d_min are the extreme values of d(x, g x) over the generators.
    """

    def __init__(self, rep: Representation, basepoint: complex,
                 axis_cap: int = 4, axis_clearance: float = 1e-6,
                 validate: bool = True):
        self.rep = rep
        self.x = complex(basepoint)
        if self.x.imag <= 0:
            raise ContextValidationError("basepoint must lie in the upper half-plane")
        self.segments = []
        self.back_segments = []
        thetas = []
        dists = []
        for i in range(rep.rank):
            g = rep.generator(i)
            gx = g.apply_h2(self.x)
            gix = g.inverse().apply_h2(self.x)
            seg = GeodesicSegment(self.x, gx)
            back = GeodesicSegment(gix, self.x)
            self.segments.append(seg)
            self.back_segments.append(back)
            dists.append(seg.length)
            hit = cross(back.carrier.unoriented(), seg.carrier.unoriented())
            if hit is None:
                raise ContextValidationError(
                    f"carriers of [g^-1 x, x] and [x, g x] do not cross for "
                    f"generator {rep.presentation.names[i]!r} (x on the axis?)"
                )
            thetas.append(hit.angle)
        self.theta = min(thetas)
        self.d_max = max(dists)
        self.d_min = min(dists)
        self.axis_cap = axis_cap
        self.axis_clearance = axis_clearance
        if validate:
            self.validate()

    def validate(self):
        """Reject basepoints on (or too близко to) conjugate generator axes."""
        clearance = self.axis_clearance
        if self.theta <= clearance:
            raise ContextValidationError(f"degenerate angle floor theta={self.theta}")
        worst = math.inf
        if self.rep.is_real():
            gens = self.rep.letter_array()
            for i in range(self.rep.rank):
                axis, _ = _axis_of(self.rep.generator(i))
                u0, v0 = _axis_pair(axis)
                worst = min(worst, _geodesic_clearance(self.x, u0, v0))
                for _lvl, mats, _last in _kernels.iter_ball_levels(gens, self.axis_cap):
                    iu = _mobius_images(mats, u0)
                    iv = _mobius_images(mats, v0)
                    lo = np.minimum(iu, iv)
                    hi = np.maximum(iu, iv)
                    worst = min(worst, _clearance_batch(self.x, lo, hi))
        self.axis_distance = worst
        if worst <= clearance:
            raise ContextValidationError(
                f"basepoint is within {worst:.3e} of a conjugate generator axis"
            )

    def window(self, margin: float = 0.5) -> Window:
        return Window(self.x, self.d_max + margin)

    def materialize(self, lam) -> FiniteLamination:
        """Instantiate an orbit spec over a window covering all segments."""
        if isinstance(lam, OrbitSpec):
            return orbit_instantiate(lam, self.window())
        return lam


def _axis_of(m: UnimodularMatrix):
    from .hypcore import complex_displacement

    return complex_displacement(m)


def _axis_pair(axis: OrientedGeodesic):
    g = axis.unoriented()
    u = math.inf if g.e1.is_infinity else g.e1.value.real
    v = math.inf if g.e2.is_infinity else g.e2.value.real
    return u, v


def _geodesic_clearance(x: complex, u: float, v: float) -> float:
    if math.isinf(v):
        return math.asinh(abs(x.real - u) / x.imag)
    center, radius = (u + v) / 2.0, abs(v - u) / 2.0
    return math.asinh(abs(abs(x - center) ** 2 - radius**2) / (2.0 * radius * x.imag))


def _clearance_batch(x: complex, lo: np.ndarray, hi: np.ndarray) -> float:
    fin = np.isfinite(hi)
    out = np.empty(len(lo))
    center = 0.5 * (lo + hi)
    radius = 0.5 * (hi - lo)
    with np.errstate(invalid="ignore"):
        circ = np.arcsinh(np.abs(np.abs(x - center) ** 2 - radius**2)
                          / (2.0 * radius * x.imag))
    out = np.where(fin, circ, np.arcsinh(np.abs(x.real - lo) / x.imag))
    return float(np.nanmin(out)) if len(out) else math.inf


# ---------------------------------------------------------------------------
# the cocycle


def _cocycle_factors(lam: FiniteLamination, seg: GeodesicSegment,
                     transfer: GeodesicTransfer):
    """(oriented transferred axis, effective weight) per crossing, in order."""
    factors = []
    for c in crossings(lam, seg):
        axis = orient_crossing_leaf(c.geodesic, c)
        axis = transfer.apply_oriented(axis) if not transfer.is_identity else axis
        w = c.weight * (0.5 if c.flag in ("start", "end") else 1.0)
        factors.append((axis, w))
    return factors


def bending_cocycle(lam: FiniteLamination, x: complex, y: complex,
                    t: complex = 1.0,
                    transfer: GeodesicTransfer | None = None) -> UnimodularMatrix:
    """Ordered product of axis isometries over the leaves crossing [x, y].

    Leaves are oriented by the crossing convention, endpoint crossings carry
    half weight, and each axis is pushed through the boundary transfer before
    exponentiation.  No crossings gives the identity.
    """
    transfer = transfer or GeodesicTransfer.identity()
    seg = GeodesicSegment(x, y)
    out = UnimodularMatrix.identity()
    for axis, w in _cocycle_factors(lam, seg, transfer):
        out = out @ axis_isometry(axis, t * w)
    return out


class PreparedBending:
    """Crossing data of one lamination against every generator segment.

    Preparing once makes the family t -> bent representation cheap to
    evaluate on grids of t.
    """

    def __init__(self, ctx: BendingContext, lam):
        self.ctx = ctx
        self.lam = ctx.materialize(lam)
        tr = ctx.rep.transfer
        self.factors = [
            _cocycle_factors(self.lam, seg, tr) for seg in ctx.segments
        ]

    def cocycle(self, j: int, t: complex) -> UnimodularMatrix:
        out = UnimodularMatrix.identity()
        for axis, w in self.factors[j]:
            out = out @ axis_isometry(axis, t * w)
        return out

    def rep(self, t: complex) -> Representation:
        names = self.ctx.rep.presentation.names
        images = {}
        for j, name in enumerate(names):
            if t == 0:
                images[name] = self.ctx.rep.images[name]
            else:
                images[name] = self.cocycle(j, t) @ self.ctx.rep.images[name]
        return self.ctx.rep.with_images(images)

    def derivative_images(self) -> dict:
        """d/dt at t=0 of each bent generator image (closed form)."""
        names = self.ctx.rep.presentation.names
        out = {}
        for j, name in enumerate(names):
            dC = _zero_matrix()
            for axis, w in self.factors[j]:
                dC = _mat_add(dC, _scaled_reflection(axis, w / 2.0))
            out[name] = _mat_mul_raw(dC, self.ctx.rep.images[name])
        return out


def bend(ctx: BendingContext, lam, t: complex) -> Representation:
    """Bent representation: each generator image is left-multiplied by the
    cocycle of its segment.  t = 0 returns the base representation exactly."""
    return PreparedBending(ctx, lam).rep(t)


# raw 2x2 complex helpers for derivative bookkeeping (not unimodular)

def _zero_matrix():
    return (0j, 0j, 0j, 0j)


def _mat_add(m1, m2):
    return tuple(a + b for a, b in zip(m1, m2))


def _scaled_reflection(axis: OrientedGeodesic, scale: complex):
    """scale * M diag(1, -1) M^{-1} for the frame M of the axis."""
    m = geodesic_frame(axis).inverse()
    a, b, c, d = m.a, m.b, m.c, m.d
    # M diag(1,-1) M^{-1} with det M = 1: [[ad+bc, -2ab], [2cd, -(ad+bc)]]
    return (
        scale * (a * d + b * c),
        scale * (-2.0 * a * b),
        scale * (2.0 * c * d),
        scale * (-(a * d + b * c)),
    )


def _mat_mul_raw(m1, m2: UnimodularMatrix):
    a1, b1, c1, d1 = m1
    return (
        a1 * m2.a + b1 * m2.c,
        a1 * m2.b + b1 * m2.d,
        c1 * m2.a + d1 * m2.c,
        c1 * m2.b + d1 * m2.d,
    )


def _raw_trace(m):
    return m[0] + m[3]


# ---------------------------------------------------------------------------
# partition scheme


class PartitionScheme:
    """Equal subdivision of a generator segment with hat partition of unity.

    Node parameters are s_i = i/m; lambda_i is the clamped hat supported on
    [s_{i-1}, s_{i+1}], identically one on the first (respectively last)
    subsegment for i = 1 (respectively i = m - 1), and the family sums to one
    on the whole segment.
    """

    def __init__(self, seg: GeodesicSegment, m: int):
        if m < 2:
            raise ValueError("partition needs m >= 2")
        self.seg = seg
        self.m = m
        self.points = [seg.point_at(i / m) for i in range(m + 1)]
        self.s_tol = ENDPOINT_TOL / seg.length

    def node(self, i: int) -> float:
        return i / self.m

    def lam_value(self, i: int, s: float) -> float:
        """Value of lambda_i at crossing parameter s."""
        m = self.m
        h = 1.0 / m
        lo, mid, hi = (i - 1) * h, i * h, (i + 1) * h
        if i == 1 and s <= mid:
            return 1.0 if s >= -self.s_tol else 0.0
        if i == m - 1 and s >= mid:
            return 1.0 if s <= 1.0 + self.s_tol else 0.0
        if s <= lo or s >= hi:
            return 0.0
        return 1.0 - abs(s - mid) / h

    def spacing_defect(self) -> float:
        """Largest deviation of consecutive point distances from the mean."""
        ds = [distance_h2(self.points[i], self.points[i + 1]) for i in range(self.m)]
        mean = sum(ds) / len(ds)
        return max(abs(d - mean) for d in ds)


# ---------------------------------------------------------------------------
# window bump


class WindowBump:
    """Piecewise-linear bump in distance from a marked point.

    Value one within half the radius, linear to zero at the radius; composed
    with a group element by measuring from the translated marked point.
    """

    def __init__(self, center: complex, radius: float):
        self.center = complex(center)
        self.radius = float(radius)

    def value(self, g: Geodesic) -> float:
        d = distance_to_geodesic(self.center, g)
        if d >= self.radius:
            return 0.0
        if d <= 0.5 * self.radius:
            return 1.0
        return (self.radius - d) / (0.5 * self.radius)


def window_bump_radius(ctx: BendingContext, lam: FiniteLamination, j: int,
                       m: int, shrink: float = 0.7, floor: float = 1e-7) -> float:
    """Desk-scale search for the bump radius at the basepoint.

    Shrinks r until every support leaf within distance r of x crosses both
    the backward and forward carriers at points within d_min/m of x.  Leaves
    through x would drive r to zero, which the context validation prevents.
    """
    x = ctx.x
    fwd = ctx.segments[j].carrier.unoriented()
    back = ctx.back_segments[j].carrier.unoriented()
    eps = ctx.d_min / m
    dists = [distance_to_geodesic(x, lf.geodesic) for lf in lam.leaves]
    r = ctx.d_min / 2.0

    def admissible(r: float) -> bool:
        for lf, d in zip(lam.leaves, dists):
            if d > r:
                continue
            for carrier in (back, fwd):
                hit = cross(lf.geodesic, carrier)
                if hit is None or distance_h2(hit.point, x) > eps:
                    return False
        return True

    while not admissible(r):
        r *= shrink
        if r < floor:
            raise ContextValidationError(
                "window bump radius collapsed; a leaf passes through the basepoint"
            )
    return r


# ---------------------------------------------------------------------------
# the approximation bundle


@dataclass
class PartitionBundle:
    """All artifacts of the partition approximation for one generator and one m."""

    ctx: BendingContext
    generator: int
    m: int
    scheme: PartitionScheme
    subseg_masses: list          # per subsegment: consolidated crossing mass
    subseg_axes: list            # per subsegment: distinguished leaf (or None)
    subseg_isoms: list           # C_i factors
    node_masses: list            # per interior node: mass_left + mass_right
    mass_left: list              # a_i
    mass_right: list             # b_i
    node_axes: list              # per interior node: nearest leaf (or None)
    node_isoms: list             # D_i factors
    node_isoms_left: list        # A(node axis, a_i)
    node_isoms_right: list       # A(node axis, b_i)
    head_window_mass: complex    # bump-weighted head mass (a')
    head_rest_mass: complex      # complementary head mass (a'')
    tail_window_mass: complex    # bump-weighted tail mass (b')
    tail_rest_mass: complex      # complementary tail mass (b'')
    head_window_isom: UnimodularMatrix   # P
    head_rest_isom: UnimodularMatrix     # Q
    tail_rest_isom: UnimodularMatrix     # R
    tail_window_isom: UnimodularMatrix   # S
    node_product: UnimodularMatrix       # product of the D_i
    subseg_product: UnimodularMatrix     # product of the C_i
    product_gap: float                   # norm of the product difference
    cylinder_radius: float               # measured subsegment cylinder radius
    bump_radius: float
    bump_total: complex          # bump-weighted mass of the whole lamination

    def identity_defects(self) -> tuple:
        """Residuals of the head/tail factorization identities."""
        d_head = norm_diff(self.node_isoms[0],
                           self.head_window_isom @ self.head_rest_isom
                           @ self.node_isoms_right[0])
        d_tail = norm_diff(self.node_isoms[-1],
                           self.node_isoms_left[-1] @ self.tail_rest_isom
                           @ self.tail_window_isom)
        return d_head, d_tail


def _transferred_oriented(tr: GeodesicTransfer, crossing) -> OrientedGeodesic:
    axis = orient_crossing_leaf(crossing.geodesic, crossing)
    return tr.apply_oriented(axis) if not tr.is_identity else axis


def _min_cylinder_radius(tr: GeodesicTransfer, core_axis: OrientedGeodesic,
                         base_h2: complex, members) -> float:
    """Radius needed to hold the transferred member leaves around one core."""
    if len(members) <= 1:
        return 0.0
    frame = geodesic_frame(core_axis)
    if tr.is_identity or tr.kind == "table":
        base = embed_h2(base_h2)
    else:
        base = tr.matrix.apply_h3(embed_h2(base_h2))
    q = frame.apply_h3(base)
    lam_height = math.hypot(abs(q.w), q.t)
    worst = 0.0
    for c in members:
        g = tr.apply_geodesic(c.geodesic) if not tr.is_identity else c.geodesic
        m1 = frame.apply_boundary(g.e1)
        m2 = frame.apply_boundary(g.e2)
        mod1 = math.inf if m1.is_infinity else abs(m1.value)
        mod2 = math.inf if m2.is_infinity else abs(m2.value)
        lo, hi = min(mod1, mod2), max(mod1, mod2)
        lo_n = lo / lam_height
        hi_n = hi / lam_height
        r1 = 0.0 if lo_n == 0 else (math.inf if lo_n >= 1 else 2.0 * math.atanh(lo_n))
        r2 = 0.0 if hi_n == math.inf else (math.inf if hi_n <= 1 else 2.0 * math.atanh(1.0 / hi_n))
        worst = max(worst, r1, r2)
    return worst


def build_partition_bundle(ctx: BendingContext, lam: FiniteLamination,
                           j: int, m: int) -> PartitionBundle:
    """Assemble the partition approximation artifacts for generator j.

    Subsegment masses use the half-endpoint convention, the distinguished
    leaf of a subsegment is the crossing nearest its midpoint, node leaves
    are the crossings nearest each node within the two adjacent subsegments,
    and the head/tail window splits use the bump from the radius search,
    making the factorization identities exact up to rounding.
    """
    seg = ctx.segments[j]
    scheme = PartitionScheme(seg, m)
    tr = ctx.rep.transfer
    cl = crossings(lam, seg)
    stol = scheme.s_tol
    h = 1.0 / m
    identity = UnimodularMatrix.identity()

    def members_in(lo: float, hi: float):
        return [c for c in cl if lo - stol <= c.s <= hi + stol]

    def prime_sum(lo: float, hi: float, f=None) -> complex:
        total = 0j
        for c in members_in(lo, hi):
            half = 0.5 if (abs(c.s - lo) <= stol or abs(c.s - hi) <= stol) else 1.0
            val = 1.0 if f is None else f(c)
            total += c.weight * half * val
        return total

    # subsegments
    subseg_masses, subseg_axes, subseg_isoms = [], [], []
    radius = 0.0
    for i in range(m):
        lo, hi = i * h, (i + 1) * h
        members = members_in(lo, hi)
        mass = prime_sum(lo, hi)
        subseg_masses.append(mass)
        if members:
            mid = lo + 0.5 * h
            pick = min(members, key=lambda c: (abs(c.s - mid), c.s))
            subseg_axes.append(pick)
            axis = _transferred_oriented(tr, pick)
            subseg_isoms.append(axis_isometry(axis, mass))
            radius = max(
                radius,
                _min_cylinder_radius(tr, axis, seg.point_at(mid), members),
            )
        else:
            subseg_axes.append(None)
            subseg_isoms.append(identity)

    # interior nodes
    node_masses, mass_left, mass_right = [], [], []
    node_axes, node_isoms, node_l, node_r = [], [], [], []
    for i in range(1, m):
        s_i = i * h
        lam_i = lambda c, i=i: scheme.lam_value(i, c.s)
        a_i = prime_sum(s_i - h, s_i, lam_i)
        b_i = prime_sum(s_i, s_i + h, lam_i)
        members = members_in(s_i - h, s_i + h)
        mass_left.append(a_i)
        mass_right.append(b_i)
        node_masses.append(a_i + b_i)
        if members:
            pick = min(members, key=lambda c: (abs(c.s - s_i), c.s))
            node_axes.append(pick)
            axis = _transferred_oriented(tr, pick)
            node_isoms.append(axis_isometry(axis, a_i + b_i))
            node_l.append(axis_isometry(axis, a_i))
            node_r.append(axis_isometry(axis, b_i))
        else:
            node_axes.append(None)
            node_isoms.append(identity)
            node_l.append(identity)
            node_r.append(identity)

    # head/tail window splits
    r_bump = window_bump_radius(ctx, lam, j, m)
    bump_x = WindowBump(ctx.x, r_bump)
    gx = ctx.segments[j].end
    bump_gx = WindowBump(gx, r_bump)
    lam1 = lambda c: scheme.lam_value(1, c.s)
    lam_last = lambda c: scheme.lam_value(m - 1, c.s)
    a_w = prime_sum(0.0, h, lambda c: lam1(c) * bump_x.value(c.geodesic))
    a_r = prime_sum(0.0, h, lambda c: lam1(c) * (1.0 - bump_x.value(c.geodesic)))
    b_w = prime_sum(1.0 - h, 1.0, lambda c: lam_last(c) * bump_gx.value(c.geodesic))
    b_r = prime_sum(1.0 - h, 1.0, lambda c: lam_last(c) * (1.0 - bump_gx.value(c.geodesic)))
    if node_axes[0] is not None:
        head_axis = _transferred_oriented(tr, node_axes[0])
        P = axis_isometry(head_axis, a_w)
        Q = axis_isometry(head_axis, a_r)
    else:
        P = Q = identity
    if node_axes[-1] is not None:
        tail_axis = _transferred_oriented(tr, node_axes[-1])
        R = axis_isometry(tail_axis, b_r)
        S = axis_isometry(tail_axis, b_w)
    else:
        R = S = identity

    B = identity
    for d in node_isoms:
        B = B @ d
    E = identity
    for c in subseg_isoms:
        E = E @ c

    bump_total = sum(lf.weight * bump_x.value(lf.geodesic) for lf in lam.leaves)

    return PartitionBundle(
        ctx=ctx, generator=j, m=m, scheme=scheme,
        subseg_masses=subseg_masses, subseg_axes=subseg_axes,
        subseg_isoms=subseg_isoms,
        node_masses=node_masses, mass_left=mass_left, mass_right=mass_right,
        node_axes=node_axes, node_isoms=node_isoms,
        node_isoms_left=node_l, node_isoms_right=node_r,
        head_window_mass=a_w, head_rest_mass=a_r,
        tail_window_mass=b_w, tail_rest_mass=b_r,
        head_window_isom=P, head_rest_isom=Q,
        tail_rest_isom=R, tail_window_isom=S,
        node_product=B, subseg_product=E,
        product_gap=norm_diff(E, B),
        cylinder_radius=radius,
        bump_radius=r_bump,
        bump_total=bump_total,
    )


# ---------------------------------------------------------------------------
# conjugated comparison


def conjugated_distance(bundles_n, bundles_0):
    """Conjugator from the first generator's head factors and the resulting
    distance between the two approximated bent generator families.

    Returns (H, dist) with dist the max over generators of
    |H E_n g H^-1 - E_0 g|; bitwise-equal head factors short-circuit to the
    exact identity so equal inputs report distance zero exactly.
    """
    if len(bundles_n) != len(bundles_0):
        raise MismatchedContexts("generator counts differ")
    for bn, b0 in zip(bundles_n, bundles_0):
        if bn.m != b0.m or bn.ctx is not b0.ctx or bn.generator != b0.generator:
            raise MismatchedContexts("bundles built over different contexts")
    P_n = bundles_n[0].head_window_isom
    P_0 = bundles_0[0].head_window_isom
    if P_n.entries_equal(P_0):
        H = UnimodularMatrix.identity()
    else:
        H = P_0 @ P_n.inverse()
    Hi = H.inverse()
    dist = 0.0
    for bn, b0 in zip(bundles_n, bundles_0):
        g = bn.ctx.rep.generator(bn.generator)
        lhs = H @ bn.subseg_product @ g @ Hi
        rhs = b0.subseg_product @ g
        dist = max(dist, norm_diff(lhs, rhs))
    return H, dist


def rep_class_distance(rep1: Representation, rep2: Representation, words) -> float:
    """Max word-trace discrepancy with the canonical lift sign per word."""
    if rep1.presentation.names != rep2.presentation.names:
        raise MismatchedContexts("representations have different presentations")
    worst = 0.0
    for w in words:
        t1 = rep1.evaluate(w).canonical_sign().trace
        t2 = rep2.evaluate(w).canonical_sign().trace
        worst = max(worst, abs(t1 - t2))
    return worst


# ---------------------------------------------------------------------------
# vector fields and holomorphy


def _word_trace(prepared: PreparedBending, w, t: complex,
                ref: complex | None = None) -> complex:
    tr = prepared.rep(t).evaluate(w).trace
    if ref is not None and abs(-tr - ref) < abs(tr - ref):
        return -tr
    return tr


def exact_bending_derivatives(ctx: BendingContext, lam, words) -> list:
    """Closed-form d/dt at t=0 of the word traces of the bent family.

    Differentiates each cocycle factor (derivative scale/2 times the frame
    conjugate of diag(1,-1)) and applies the product rule over the word.
    """
    prepared = lam if isinstance(lam, PreparedBending) else PreparedBending(ctx, lam)
    base = {}
    names = ctx.rep.presentation.names
    for name in names:
        base[name] = ctx.rep.images[name]
    deriv = prepared.derivative_images()
    out = []
    for w in words:
        if isinstance(w, str):
            w = parse_word(w, names)
        mats = []
        ders = []
        for letter in w:
            name = names[letter // 2]
            g = base[name]
            dg = deriv[name]
            if letter & 1:
                gi = g.inverse()
                # d(g^-1) = -g^-1 dg g^-1
                dgi = _mat_mul_raw(
                    tuple(-v for v in _mat_mul_from_uni(gi, dg)), gi
                )
                mats.append(gi)
                ders.append(dgi)
            else:
                mats.append(g)
                ders.append(dg)
        total = 0j
        L = len(mats)
        for k in range(L):
            pre = UnimodularMatrix.identity()
            for i in range(k):
                pre = pre @ mats[i]
            post = UnimodularMatrix.identity()
            for i in range(k + 1, L):
                post = post @ mats[i]
            term = _mat_mul_from_uni(pre, ders[k])
            term = _mat_mul_raw(term, post)
            total += _raw_trace(term)
        out.append(total)
    return out


def _mat_mul_from_uni(m1: UnimodularMatrix, m2raw):
    a2, b2, c2, d2 = m2raw
    return (
        m1.a * a2 + m1.b * c2,
        m1.a * b2 + m1.b * d2,
        m1.c * a2 + m1.d * c2,
        m1.c * b2 + m1.d * d2,
    )


def bending_vector_field(ctx: BendingContext, lam, words, h: float = 1e-4,
                         check_tol: float = 1e-5) -> list:
    """Central-difference derivative at t=0 of each word trace, with a
    step-halving consistency (Richardson) check."""
    prepared = lam if isinstance(lam, PreparedBending) else PreparedBending(ctx, lam)
    out = []
    for w in words:
        ref = prepared.rep(0.0).evaluate(w).canonical_sign().trace
        d_h = (_word_trace(prepared, w, h, ref) - _word_trace(prepared, w, -h, ref)) / (2 * h)
        h2 = h / 2.0
        d_h2 = (_word_trace(prepared, w, h2, ref) - _word_trace(prepared, w, -h2, ref)) / (2 * h2)
        if abs(d_h - d_h2) > check_tol * max(1.0, abs(d_h2)):
            raise NonConvergentDifference(
                f"derivative of word {w!r} unstable: {d_h} vs {d_h2}"
            )
        out.append((4.0 * d_h2 - d_h) / 3.0)
    return out


def holomorphy_residual(ctx: BendingContext, lam, words, t0: complex,
                        h: float = 1e-4) -> float:
    """Max Cauchy-Riemann residual |f_x + i f_y| / |f_x| of the word traces."""
    prepared = lam if isinstance(lam, PreparedBending) else PreparedBending(ctx, lam)
    worst = 0.0
    for w in words:
        ref = _word_trace(prepared, w, t0)
        fx = (_word_trace(prepared, w, t0 + h, ref)
              - _word_trace(prepared, w, t0 - h, ref)) / (2 * h)
        fy = (_word_trace(prepared, w, t0 + 1j * h, ref)
              - _word_trace(prepared, w, t0 - 1j * h, ref)) / (2 * h)
        num = abs(fx + 1j * fy)
        if num <= 1e-13:
            continue
        worst = max(worst, num / abs(fx))
    return worst
