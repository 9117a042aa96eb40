"""Poincare disk primitives: points, isometries, geodesics, segments, tangents.

Exact-formula geometry on the open unit disk with the curvature -1 metric
ds = 2|dz| / (1 - |z|^2). Ideal boundary points are stored by angle so they
never drift off |z| = 1. All values are immutable; every operation is a pure
function.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional

# Euclidean tolerance for point coincidence. Compositions of <= 1e4 Mobius
# maps in double precision stay well below this.
COINCIDENCE_TOL = 1e-10

# Euclidean tolerance for "endpoint lies on a geodesic" contact tests.
ON_GEODESIC_TOL = 1e-10

# Tolerance for identifying two supporting geodesics.
SAME_GEODESIC_TOL = 1e-9


class DomainError(ValueError):
    """An argument violates an operation's precondition."""


@dataclass(frozen=True)
class DiskPoint:
    """A point of the closed disk: interior (|z| < 1) or ideal (|z| = 1).

    Ideal points keep their boundary angle as the authoritative field; z is
    reconstructed as exp(i*angle) so repeated transforms cannot push it
    outside the circle.
    """

    z: complex
    ideal: bool = False
    angle: Optional[float] = None

    @staticmethod
    def interior(z: complex) -> "DiskPoint":
        z = complex(z)
        if abs(z) >= 1.0:
            raise DomainError(f"interior point requires |z| < 1, got |z| = {abs(z)}")
        return DiskPoint(z, False, None)

    @staticmethod
    def ideal_at(angle: float) -> "DiskPoint":
        angle = math.remainder(float(angle), 2.0 * math.pi)
        return DiskPoint(cmath.exp(1j * angle), True, angle)

    @property
    def is_ideal(self) -> bool:
        return self.ideal

    def require_interior(self, what: str = "operation") -> complex:
        if self.ideal:
            raise DomainError(f"{what} requires an interior point")
        return self.z

    def coincides(self, other: "DiskPoint", tol: float = COINCIDENCE_TOL) -> bool:
        return abs(self.z - other.z) <= tol


def as_point(p) -> DiskPoint:
    """Coerce a complex number (interior) or DiskPoint to a DiskPoint."""
    if isinstance(p, DiskPoint):
        return p
    return DiskPoint.interior(p)


def _dist_zz(z1: complex, z2: complex) -> float:
    # 2 atanh |(z1 - z2) / (1 - conj(z2) z1)|, stable near zero.
    num = abs(z1 - z2)
    den = abs(1.0 - z2.conjugate() * z1)
    if num == 0.0:
        return 0.0
    return 2.0 * math.atanh(min(num / den, 1.0 - 1e-17))


def dist(p, q) -> float:
    """Hyperbolic distance between interior points."""
    p, q = as_point(p), as_point(q)
    z1 = p.require_interior("dist")
    z2 = q.require_interior("dist")
    return _dist_zz(z1, z2)


def conformal_factor(z: complex) -> float:
    """Metric scale 2 / (1 - |z|^2) at an interior point."""
    return 2.0 / (1.0 - abs(z) ** 2)


@dataclass(frozen=True)
class Isometry:
    """Orientation-preserving isometry z -> (a z + b) / (conj(b) z + conj(a)).

    Normalized so |a|^2 - |b|^2 = 1. The pair (a, b) and (-a, -b) act
    identically; comparisons are up to that sign.
    """

    a: complex
    b: complex

    @staticmethod
    def identity() -> "Isometry":
        return Isometry(1.0 + 0.0j, 0.0 + 0.0j)

    @staticmethod
    def normalized(a: complex, b: complex) -> "Isometry":
        norm2 = abs(a) ** 2 - abs(b) ** 2
        if norm2 <= 0.0:
            raise DomainError("isometry norm |a|^2 - |b|^2 must be positive")
        s = math.sqrt(norm2)
        return Isometry(a / s, b / s)

    @staticmethod
    def rotation(alpha: float) -> "Isometry":
        return Isometry(cmath.exp(0.5j * alpha), 0.0j)

    @staticmethod
    def translation_real(t: float) -> "Isometry":
        # Axis = real diameter, translation length |t|, attracting end +1 for t > 0.
        return Isometry(complex(math.cosh(0.5 * t)), complex(math.sinh(0.5 * t)))

    @staticmethod
    def point_to_origin(p) -> "Isometry":
        """The transvection sending p to 0 along the geodesic through both."""
        z = as_point(p).require_interior("point_to_origin")
        s = math.sqrt(1.0 - abs(z) ** 2)
        return Isometry(1.0 / s, -z / s)

    def compose(self, other: "Isometry") -> "Isometry":
        # Matrix product [[a,b],[conj b, conj a]] . [[a',b'],[conj b', conj a']].
        a = self.a * other.a + self.b * other.b.conjugate()
        b = self.a * other.b + self.b * other.a.conjugate()
        return Isometry.normalized(a, b)

    def __matmul__(self, other: "Isometry") -> "Isometry":
        return self.compose(other)

    def inverse(self) -> "Isometry":
        return Isometry(self.a.conjugate(), -self.b)

    def apply_z(self, z: complex) -> complex:
        return (self.a * z + self.b) / (self.b.conjugate() * z + self.a.conjugate())

    def apply(self, p) -> DiskPoint:
        p = as_point(p)
        if p.ideal:
            w = self.apply_z(p.z)
            return DiskPoint.ideal_at(cmath.phase(w))
        w = self.apply_z(p.z)
        if abs(w) >= 1.0:
            # Pure rounding artifact: interior points map strictly inside.
            w = w / abs(w) * (1.0 - 1e-16)
        return DiskPoint(w, False, None)

    def deriv(self, z: complex) -> complex:
        """Complex derivative at z (the map is holomorphic)."""
        return 1.0 / (self.b.conjugate() * z + self.a.conjugate()) ** 2

    def sign_canonical(self) -> "Isometry":
        """Flip to the representative with Re a > 0 (or Im a > 0, Re b > 0, Im b > 0)."""
        for v in (self.a.real, self.a.imag, self.b.real, self.b.imag):
            if v > 0.0:
                return self
            if v < 0.0:
                return Isometry(-self.a, -self.b)
        return self

    def almost_equal(self, other: "Isometry", tol: float = 1e-9) -> bool:
        u, v = self.sign_canonical(), other.sign_canonical()
        return abs(u.a - v.a) <= tol and abs(u.b - v.b) <= tol

    def is_identity(self, tol: float = 1e-9) -> bool:
        return self.almost_equal(Isometry.identity(), tol)

    @property
    def trace(self) -> float:
        # The matrix trace a + conj(a) is real.
        return 2.0 * self.a.real

    def is_hyperbolic(self, tol: float = 1e-9) -> bool:
        return abs(self.trace) > 2.0 + tol

    def translation_length(self) -> float:
        """2 arccosh(|tr|/2) for hyperbolic elements."""
        half = abs(self.trace) / 2.0
        if half <= 1.0:
            raise DomainError("translation length requires a hyperbolic isometry")
        return 2.0 * math.acosh(half)

    def boundary_fixed_points(self) -> tuple[complex, complex]:
        """The two fixed points on |z| = 1 of a hyperbolic isometry."""
        if not self.is_hyperbolic():
            raise DomainError("axis requires a hyperbolic isometry")
        # conj(b) z^2 + (conj(a) - a) z - b = 0
        bq = self.b.conjugate()
        if abs(bq) < 1e-15:
            # Diagonal: fixes 0 and infinity; hyperbolic with b = 0 means a real,
            # axis through 0 fixed pointwise rotation? a real |a|>1 impossible
            # under normalization unless b != 0. Treat as real-axis translation.
            raise DomainError("degenerate hyperbolic matrix")
        bl = self.a.conjugate() - self.a
        disc = cmath.sqrt(bl * bl + 4.0 * bq * self.b)
        z1 = (-bl + disc) / (2.0 * bq)
        z2 = (-bl - disc) / (2.0 * bq)
        return z1 / abs(z1), z2 / abs(z2)

    def axis(self) -> "Geodesic":
        z1, z2 = self.boundary_fixed_points()
        return Geodesic.from_ideal_angles(cmath.phase(z1), cmath.phase(z2))


def isometry_from_two_points(p1, p2, q1, q2) -> Isometry:
    """The unique orientation-preserving isometry with p1 -> q1, p2 -> q2.

    Requires dist(p1, p2) = dist(q1, q2); the mismatch is not checked beyond
    what the construction tolerates.
    """
    gp = _frame(as_point(p1), as_point(p2))
    gq = _frame(as_point(q1), as_point(q2))
    return gq.inverse() @ gp


def _frame(p: DiskPoint, q: DiskPoint) -> Isometry:
    # Isometry sending p to 0 and q onto the positive real axis.
    g = Isometry.point_to_origin(p)
    w = g.apply_z(q.z)
    if abs(w) < 1e-15:
        raise DomainError("frame requires two distinct points")
    return Isometry.rotation(-cmath.phase(w)) @ g


# ---------------------------------------------------------------------------
# Raw matrix pairs for deep words.
#
# A long product of generator matrices cannot be renormalized in floats:
# entries grow like e^(d/2) for displacement d, and |a|^2 - |b|^2 recovers 1
# by cancelling ~e^d of noise, which turns negative past d ~ 35. The entries
# themselves keep ~1e-15 relative accuracy, and everything below is either a
# ratio of entries or uses det = 1 analytically, so raw pairs stay reliable
# until the entries themselves overflow (displacement ~1400).


def raw_identity() -> tuple:
    return (1.0 + 0.0j, 0.0j)


def raw_compose(p: tuple, q: tuple) -> tuple:
    """Matrix product of two (a, b) pairs, no normalization."""
    pa, pb = p
    qa, qb = q
    return (pa * qa + pb * qb.conjugate(), pa * qb + pb * qa.conjugate())


def raw_reach(pos_u: complex, pair: tuple, pos_v: complex) -> tuple:
    """(dist(pos_u, g(pos_v)), unit chart direction at pos_u toward it).

    Stable when g is enormous and the image is pinned against the unit
    circle; pair is g as a raw (a, b) with det 1 up to rounding.
    """
    M = Isometry.point_to_origin(pos_u)
    a, b = raw_compose((M.a, M.b), pair)
    den = b.conjugate() * pos_v + a.conjugate()
    w = (a * pos_v + b) / den
    # 1 - |w|^2 by the det = 1 identity, immune to pinning
    one_minus = (1.0 - abs(pos_v) ** 2) / (den.real ** 2 + den.imag ** 2)
    if one_minus <= 0.0:
        raise DomainError("reach target is not an interior point")
    aw = math.sqrt(max(0.0, 1.0 - one_minus))
    if aw < 1e-300:
        return 0.0, 1.0 + 0j
    ell = math.log((1.0 + aw) ** 2 / one_minus)
    Minv = M.inverse()
    u = Minv.deriv(0j) * (w / abs(w))
    return ell, u / abs(u)


def raw_trace(pair: tuple) -> float:
    return 2.0 * pair[0].real


def raw_is_hyperbolic(pair: tuple, tol: float = 1e-9) -> bool:
    return abs(raw_trace(pair)) > 2.0 + tol


def raw_translation_length(pair: tuple) -> float:
    half = abs(raw_trace(pair)) / 2.0
    if half <= 1.0:
        raise DomainError("translation length requires a hyperbolic isometry")
    return 2.0 * math.acosh(half)


def raw_axis(pair: tuple) -> "Geodesic":
    """Axis of a hyperbolic raw pair, oriented repelling -> attracting.

    Fixed points (i Im(a) +- s) / conj(b) with s = sqrt(Re(a)^2 - 1) after
    flipping the sign representative to Re(a) > 0; both lie on |z| = 1 by
    det = 1, and the + root has |derivative| < 1 (attracting).
    """
    a, b = pair
    if a.real < 0.0:
        a, b = -a, -b
    s2 = a.real ** 2 - 1.0
    if s2 <= 0.0 or b == 0.0:
        raise DomainError("axis requires a hyperbolic isometry")
    s = math.sqrt(s2)
    bq = b.conjugate()
    z_att = (1j * a.imag + s) / bq
    z_rep = (1j * a.imag - s) / bq
    return Geodesic.from_ideal_angles(cmath.phase(z_rep), cmath.phase(z_att))


@dataclass(frozen=True)
class TangentVector:
    """Tangent vector at an interior point.

    v holds the Euclidean chart components dz; the magnitude accessor
    measures hyperbolically (|v| times the conformal factor at the base).
    """

    base: complex
    v: complex

    @property
    def norm(self) -> float:
        return abs(self.v) * conformal_factor(self.base)

    def unit(self) -> "TangentVector":
        n = self.norm
        if n == 0.0:
            raise DomainError("cannot normalize a zero tangent vector")
        return TangentVector(self.base, self.v / n)

    def scaled(self, t: float) -> "TangentVector":
        return TangentVector(self.base, self.v * t)

    def plus(self, other: "TangentVector") -> "TangentVector":
        if abs(other.base - self.base) > COINCIDENCE_TOL:
            raise DomainError("tangent vectors live at different base points")
        return TangentVector(self.base, self.v + other.v)


def log_map(base, target) -> TangentVector:
    """Tangent at base pointing along the geodesic to target, norm = dist."""
    bp, tp = as_point(base), as_point(target)
    zb = bp.require_interior("log_map")
    zt = tp.require_interior("log_map")
    if abs(zb - zt) <= 1e-16:
        raise DomainError("log_map requires distinct points")
    g = Isometry.point_to_origin(bp)
    w = g.apply_z(zt)
    d = 2.0 * math.atanh(min(abs(w), 1.0 - 1e-17))
    u0 = w / abs(w)  # direction at the origin, chart = hyperbolic there / 2
    # Hyperbolic norm d at origin has chart length d/2 (conformal factor 2).
    v0 = u0 * (d / 2.0)
    ginv = g.inverse()
    return TangentVector(zb, ginv.deriv(0.0j) * v0)


def exp_map(tv: TangentVector) -> DiskPoint:
    """Walk the geodesic from tv.base with initial velocity tv for unit time."""
    d = tv.norm
    if d == 0.0:
        return DiskPoint.interior(tv.base)
    bp = DiskPoint.interior(tv.base)
    g = Isometry.point_to_origin(bp)
    u0 = g.deriv(tv.base) * tv.v
    u0 = u0 / abs(u0)
    w = math.tanh(d / 2.0) * u0
    return g.inverse().apply(w)


def unit_tangent_toward(base, target) -> TangentVector:
    return log_map(base, target).unit()


@dataclass(frozen=True)
class Geodesic:
    """Complete geodesic, stored by its two ideal endpoint angles.

    Realized as either a diameter or a circular arc orthogonal to |z| = 1.
    The derived Euclidean data (center, radius or direction) is recomputed
    from the angles on construction.
    """

    alpha: float
    beta: float
    is_diameter: bool
    center: complex      # arc: circle center; diameter: 0
    radius: float        # arc: circle radius; diameter: 0.0
    direction: complex   # diameter: unit direction; arc: unit vector center -> 0

    _DIAMETER_TOL = 1e-12

    @staticmethod
    def from_ideal_angles(alpha: float, beta: float) -> "Geodesic":
        u = cmath.exp(1j * alpha)
        w = cmath.exp(1j * beta)
        if abs(u - w) < 1e-12:
            raise DomainError("geodesic requires two distinct ideal points")
        # Canonical order for value equality.
        a1 = math.remainder(alpha, 2.0 * math.pi)
        b1 = math.remainder(beta, 2.0 * math.pi)
        if a1 > b1:
            a1, b1 = b1, a1
            u, w = w, u
        if abs(u + w) < Geodesic._DIAMETER_TOL:
            d = u
            return Geodesic(a1, b1, True, 0.0j, 0.0, d)
        # Orthogonal circle through u, w: Re(conj(c) u) = 1, Re(conj(c) w) = 1.
        # Solve the 2x2 real system for c = (cx, cy).
        det = u.real * w.imag - u.imag * w.real
        if abs(det) < 1e-15:
            # Nearly antipodal; fall back to diameter.
            d = u
            return Geodesic(a1, b1, True, 0.0j, 0.0, d)
        cx = (w.imag - u.imag) / det
        cy = (u.real - w.real) / det
        c = complex(cx, cy)
        r = math.sqrt(abs(c) ** 2 - 1.0)
        return Geodesic(a1, b1, False, c, r, -c / abs(c))

    @staticmethod
    def through(p, q) -> "Geodesic":
        """The complete geodesic through two distinct points (interior or ideal)."""
        pp, qq = as_point(p), as_point(q)
        if pp.coincides(qq, 1e-14):
            raise DomainError("geodesic requires two distinct points")
        if pp.ideal and qq.ideal:
            return Geodesic.from_ideal_angles(pp.angle, qq.angle)
        if pp.ideal or qq.ideal:
            ip, other = (pp, qq) if pp.ideal else (qq, pp)
            g = Isometry.point_to_origin(other)
            w = g.apply_z(ip.z)
            th = cmath.phase(w)
            ginv = g.inverse()
            e1 = ginv.apply(DiskPoint.ideal_at(th))
            e2 = ginv.apply(DiskPoint.ideal_at(th + math.pi))
            return Geodesic.from_ideal_angles(e1.angle, e2.angle)
        g = Isometry.point_to_origin(pp)
        w = g.apply_z(qq.z)
        th = cmath.phase(w)
        ginv = g.inverse()
        e1 = ginv.apply(DiskPoint.ideal_at(th))
        e2 = ginv.apply(DiskPoint.ideal_at(th + math.pi))
        return Geodesic.from_ideal_angles(e1.angle, e2.angle)

    @property
    def ideal_points(self) -> tuple[DiskPoint, DiskPoint]:
        return DiskPoint.ideal_at(self.alpha), DiskPoint.ideal_at(self.beta)

    def side(self, z: complex) -> float:
        """Signed Euclidean distance-like value: 0 exactly on the geodesic."""
        if self.is_diameter:
            d = self.direction
            return d.real * z.imag - d.imag * z.real
        return abs(z - self.center) - self.radius

    def contains(self, p, tol: float = ON_GEODESIC_TOL) -> bool:
        return abs(self.side(as_point(p).z)) <= tol

    def param(self, p) -> float:
        """Monotone coordinate along the geodesic.

        Arc: signed angle about the center, measured against the direction
        toward the origin (stays within (-pi/2, pi/2), no wrapping).
        Diameter: signed Euclidean coordinate along the direction.
        """
        z = as_point(p).z
        if self.is_diameter:
            d = self.direction
            return z.real * d.real + z.imag * d.imag
        e = self.direction
        u = z - self.center
        return math.atan2(e.real * u.imag - e.imag * u.real,
                          e.real * u.real + e.imag * u.imag)

    def point_at_param(self, t: float) -> DiskPoint:
        if self.is_diameter:
            z = self.direction * t
        else:
            e = self.direction
            z = self.center + self.radius * e * cmath.exp(1j * t)
        if abs(z) >= 1.0:
            return DiskPoint.ideal_at(cmath.phase(z))
        return DiskPoint.interior(z)

    def same_as(self, other: "Geodesic", tol: float = SAME_GEODESIC_TOL) -> bool:
        if self.is_diameter != other.is_diameter:
            return False
        if self.is_diameter:
            d1, d2 = self.direction, other.direction
            return abs(d1.real * d2.imag - d1.imag * d2.real) <= tol
        return abs(self.center - other.center) <= tol and abs(self.radius - other.radius) <= tol

    def center_point(self) -> DiskPoint:
        """The point splitting the chord in the disk into equal Euclidean arclengths.

        A diameter is bisected at 0. An arc is symmetric about the line from
        the origin through the circle center, so the bisector is the point of
        the circle closest to the origin.
        """
        if self.is_diameter:
            return DiskPoint.interior(0.0j)
        c = self.center
        z = c * (1.0 - self.radius / abs(c))
        return DiskPoint.interior(z)

    def closest_param_to_origin(self) -> float:
        return 0.0

    def dist_to_point(self, p) -> float:
        """Hyperbolic distance from an interior point to the complete geodesic."""
        z = as_point(p).require_interior("dist_to_point")
        g = Isometry.point_to_origin(DiskPoint.interior(z))
        moved = self.transform(g)
        if moved.is_diameter:
            return 0.0
        m = abs(moved.center) - moved.radius  # min |w| over the arc, attained inside
        if m <= 0.0:
            return 0.0
        return 2.0 * math.atanh(min(m, 1.0 - 1e-17))

    def transform(self, g: Isometry) -> "Geodesic":
        e1 = g.apply(DiskPoint.ideal_at(self.alpha))
        e2 = g.apply(DiskPoint.ideal_at(self.beta))
        return Geodesic.from_ideal_angles(e1.angle, e2.angle)


def _canonical_pair(p: DiskPoint, q: DiskPoint) -> tuple[DiskPoint, DiskPoint]:
    kp = (p.z.real, p.z.imag)
    kq = (q.z.real, q.z.imag)
    return (p, q) if kp <= kq else (q, p)


@dataclass(frozen=True)
class GeodesicSegment:
    """Unoriented geodesic segment with interior or ideal endpoints.

    Construction canonicalizes endpoint order, so (p, q) and (q, p) build
    equal values.
    """

    p: DiskPoint
    q: DiskPoint

    @staticmethod
    def between(p, q) -> "GeodesicSegment":
        pp, qq = as_point(p), as_point(q)
        if pp.coincides(qq, 1e-14):
            raise DomainError("segment requires distinct endpoints")
        a, b = _canonical_pair(pp, qq)
        return GeodesicSegment(a, b)

    @property
    def length(self) -> float:
        if self.p.ideal or self.q.ideal:
            return math.inf
        return _dist_zz(self.p.z, self.q.z)

    @property
    def geodesic(self) -> Geodesic:
        return Geodesic.through(self.p, self.q)

    def param_range(self) -> tuple[float, float]:
        g = self.geodesic
        t1, t2 = g.param(self.p), g.param(self.q)
        return (t1, t2) if t1 <= t2 else (t2, t1)

    def midpoint(self) -> DiskPoint:
        zp = self.p.require_interior("midpoint")
        self.q.require_interior("midpoint")
        step = log_map(self.p, self.q).scaled(0.5)
        return exp_map(step)

    def transform(self, g: Isometry) -> "GeodesicSegment":
        return GeodesicSegment.between(g.apply(self.p), g.apply(self.q))

    def endpoints(self) -> tuple[DiskPoint, DiskPoint]:
        return self.p, self.q


@dataclass(frozen=True)
class IntersectionReport:
    """How two segments meet: none | transverse | shared_endpoint | overlap.

    Transverse and shared-endpoint contacts contribute 1 to intersection
    counts; overlap (collinear, more than a point in common) contributes 0.
    """

    kind: str
    point: Optional[DiskPoint] = None

    @property
    def contributes(self) -> bool:
        return self.kind in ("transverse", "shared_endpoint")


def _crossing_point(g1: Geodesic, g2: Geodesic) -> Optional[complex]:
    """The intersection of two distinct complete geodesics inside the open disk."""
    if g1.is_diameter and g2.is_diameter:
        return 0.0j
    if g1.is_diameter:
        g1, g2 = g2, g1
    # g1 is an arc. Intersect with g2 (arc or diameter).
    c1, r1 = g1.center, g1.radius
    if g2.is_diameter:
        d = g2.direction
        # Points t*d with |t*d - c1| = r1.
        pr = c1.real * d.real + c1.imag * d.imag
        disc = pr * pr - (abs(c1) ** 2 - r1 * r1)
        if disc < 0.0:
            return None
        sq = math.sqrt(disc)
        for t in (pr - sq, pr + sq):
            z = d * t
            if abs(z) < 1.0:
                return z
        return None
    c2, r2 = g2.center, g2.radius
    dc = c2 - c1
    d2 = abs(dc) ** 2
    if d2 < 1e-30:
        return None
    # Radical line: |z-c1|^2 - r1^2 = |z-c2|^2 - r2^2.
    k = (r1 * r1 - r2 * r2 + d2) / (2.0 * d2)
    base = c1 + k * dc
    h2 = r1 * r1 - k * k * d2
    if h2 < 0.0:
        return None
    h = math.sqrt(h2)
    off = 1j * dc / abs(dc) * h
    for z in (base + off, base - off):
        if abs(z) < 1.0:
            return z
    return None


def segments_intersect(s1: GeodesicSegment, s2: GeodesicSegment,
                       tol: float = COINCIDENCE_TOL) -> IntersectionReport:
    """Classify how two segments meet. Symmetric in its arguments."""
    e1 = s1.endpoints()
    e2 = s2.endpoints()
    g1, g2 = s1.geodesic, s2.geodesic
    collinear = g1.same_as(g2)

    shared_pt = None
    for a in e1:
        for b in e2:
            if abs(a.z - b.z) <= tol:
                shared_pt = a
    if collinear:
        lo1, hi1 = s1.param_range()
        lo2, hi2 = s2.param_range()
        olo, ohi = max(lo1, lo2), min(hi1, hi2)
        span = ohi - olo
        # Parameter separation corresponding to more-than-a-point contact.
        eps = _param_eps(g1, tol)
        if span > eps:
            return IntersectionReport("overlap")
        if shared_pt is not None or span >= -eps:
            if shared_pt is not None:
                return IntersectionReport("shared_endpoint", shared_pt)
            return IntersectionReport("shared_endpoint", g1.point_at_param((olo + ohi) / 2.0))
        return IntersectionReport("none")
    if shared_pt is not None:
        return IntersectionReport("shared_endpoint", shared_pt)

    s1a, s1b = g2.side(e1[0].z), g2.side(e1[1].z)
    s2a, s2b = g1.side(e2[0].z), g1.side(e2[1].z)

    band = ON_GEODESIC_TOL
    # Endpoint-on-geodesic contacts (T configurations) count as transverse.
    for pt, sv in ((e1[0], s1a), (e1[1], s1b)):
        if abs(sv) <= band and _within_param(s2, pt, tol):
            return IntersectionReport("transverse", pt)
    for pt, sv in ((e2[0], s2a), (e2[1], s2b)):
        if abs(sv) <= band and _within_param(s1, pt, tol):
            return IntersectionReport("transverse", pt)

    if s1a * s1b < 0.0 and s2a * s2b < 0.0:
        z = _crossing_point(g1, g2)
        if z is None:
            return IntersectionReport("none")
        return IntersectionReport("transverse", DiskPoint.interior(z))
    return IntersectionReport("none")


def _param_eps(g: Geodesic, tol: float) -> float:
    # Convert a Euclidean tolerance to parameter units.
    if g.is_diameter:
        return tol
    return tol / g.radius


def _within_param(s: GeodesicSegment, p: DiskPoint, tol: float) -> bool:
    g = s.geodesic
    t = g.param(p)
    lo, hi = s.param_range()
    eps = _param_eps(g, tol)
    return lo - eps <= t <= hi + eps


def dist_to_segment(p, s: GeodesicSegment) -> float:
    """Hyperbolic distance from an interior point to a segment."""
    z = as_point(p).require_interior("dist_to_segment")
    g = Isometry.point_to_origin(DiskPoint.interior(z))
    moved = s.transform(g)
    geo = moved.geodesic
    lo, hi = moved.param_range()
    if geo.is_diameter:
        foot = 0.0
    else:
        foot = geo.param(geo.center_point())
    t = min(max(foot, lo), hi)
    w = geo.point_at_param(t)
    if w.ideal:
        # Clamping landed on an ideal endpoint: distance is realized inside.
        t = min(max(0.0, lo + 1e-12), hi - 1e-12)
        w = geo.point_at_param(t)
    return _dist_zz(0.0j, w.z)
