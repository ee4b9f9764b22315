"""Hyperbolic plane primitives in the upper half-plane model.

Isometries are elements of PSL(2, R) stored as normalized 2x2 matrices.
Boundary points are finite reals or the explicit ``INF`` marker; the
point at infinity is never approximated by a large float.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from adsvol.errors import (
    InputError,
    NonPositiveLength,
    NotHyperbolic,
    SharedEndpoint,
)

DET_TOLERANCE = 1e-9
CLASS_TOLERANCE = 1e-9


class _Infinity:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INF"

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()
BoundaryPoint = Union[float, _Infinity]


def is_inf(x: BoundaryPoint) -> bool:
    return x is INF


class Kind(enum.Enum):
    ELLIPTIC = "elliptic"
    PARABOLIC = "parabolic"
    HYPERBOLIC = "hyperbolic"


def normalize_matrix(m: np.ndarray) -> np.ndarray:
    """Rescale to unit determinant and fix the projective sign.

    The first entry (in a, b, c, d order) that is nonzero is made positive.
    """
    m = np.asarray(m, dtype=float).reshape(2, 2)
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    if not det > 0:
        raise InputError(f"matrix determinant must be positive, got {det!r}")
    m = m / math.sqrt(det)
    for v in m.flat:
        if v != 0.0:
            if v < 0:
                m = -m
            break
    return m


@dataclass(frozen=True)
class Mobius:
    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        m = normalize_matrix([[self.a, self.b], [self.c, self.d]])
        object.__setattr__(self, "a", float(m[0, 0]))
        object.__setattr__(self, "b", float(m[0, 1]))
        object.__setattr__(self, "c", float(m[1, 0]))
        object.__setattr__(self, "d", float(m[1, 1]))

    @classmethod
    def identity(cls) -> Mobius:
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def from_matrix(cls, m) -> Mobius:
        m = np.asarray(m, dtype=float)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    @classmethod
    def translation(cls, length: float) -> Mobius:
        """Translation by ``length`` along the imaginary axis, towards infinity."""
        h = math.exp(length / 2)
        return cls(h, 0.0, 0.0, 1.0 / h)

    @classmethod
    def rotation(cls, theta: float) -> Mobius:
        """Elliptic rotation by angle ``2*theta`` about i."""
        c, s = math.cos(theta), math.sin(theta)
        return cls(c, -s, s, c)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    @property
    def trace(self) -> float:
        return self.a + self.d

    def inverse(self) -> Mobius:
        return Mobius(self.d, -self.b, -self.c, self.a)

    def __matmul__(self, other: Mobius) -> Mobius:
        return compose(self, other)

    def is_identity(self, tol: float = CLASS_TOLERANCE) -> bool:
        return (abs(self.a - 1) <= tol and abs(self.d - 1) <= tol
                and abs(self.b) <= tol and abs(self.c) <= tol)

    def __call__(self, z: complex) -> complex:
        return (self.a * z + self.b) / (self.c * z + self.d)

    def act_boundary(self, x: BoundaryPoint) -> BoundaryPoint:
        a, b, c, d = self.a, self.b, self.c, self.d
        if is_inf(x):
            return INF if c == 0 else a / c
        den = c * x + d
        if den == 0:
            return INF
        return (a * x + b) / den

    def act_point(self, p: PlanePoint) -> PlanePoint:
        w = self(complex(p.x, p.y))
        return PlanePoint(w.real, w.imag)

    def act_geodesic(self, g: GeodesicLine) -> GeodesicLine:
        return GeodesicLine(self.act_boundary(g.p), self.act_boundary(g.q))

    def fixed_points(self) -> tuple[BoundaryPoint, BoundaryPoint]:
        """Return ``(repelling, attracting)`` fixed points of a hyperbolic element."""
        if classify(self) is not Kind.HYPERBOLIC:
            raise NotHyperbolic(f"{self} is not hyperbolic")
        a, b, c, d = self.a, self.b, self.c, self.d
        if c == 0:
            finite = b / (d - a)
            return (finite, INF) if abs(a) > abs(d) else (INF, finite)
        # roots of c x^2 + (d - a) x - b = 0, in the cancellation-free form
        bq = d - a
        disc = math.sqrt(bq * bq + 4.0 * b * c)
        s = -0.5 * (bq + math.copysign(disc, bq))
        x1 = s / c
        x2 = -b / s if s != 0 else x1
        # derivative at a fixed point is 1/(cx+d)^2; attracting when < 1
        if abs(c * x1 + d) > abs(c * x2 + d):
            return x2, x1
        return x1, x2


def compose(m1: Mobius, m2: Mobius) -> Mobius:
    return Mobius.from_matrix(m1.matrix @ m2.matrix)


def inverse(m: Mobius) -> Mobius:
    return m.inverse()


def classify(m: Mobius, tol: float = CLASS_TOLERANCE) -> Kind:
    t = abs(m.trace)
    if t > 2 + tol:
        return Kind.HYPERBOLIC
    if abs(t - 2) <= tol:
        return Kind.PARABOLIC
    return Kind.ELLIPTIC


def length_from_trace(trace: float) -> float:
    return 2.0 * math.acosh(abs(trace) / 2.0)


def translation_length(m: Mobius) -> float:
    if classify(m) is not Kind.HYPERBOLIC:
        raise NotHyperbolic(f"trace {m.trace!r} does not exceed 2")
    return length_from_trace(m.trace)


@dataclass(frozen=True)
class PlanePoint:
    x: float
    y: float

    def __post_init__(self):
        if not self.y > 0:
            raise InputError(f"upper half-plane point needs y > 0, got {self.y!r}")

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)


def point_distance(p1: PlanePoint, p2: PlanePoint) -> float:
    num = (p1.x - p2.x) ** 2 + (p1.y - p2.y) ** 2
    return math.acosh(1.0 + num / (2.0 * p1.y * p2.y))


def _same_point(x: BoundaryPoint, y: BoundaryPoint, tol: float = 0.0) -> bool:
    if is_inf(x) or is_inf(y):
        return x is y
    return abs(x - y) <= tol * max(1.0, abs(x), abs(y))


@dataclass(frozen=True)
class GeodesicLine:
    """Unoriented geodesic. Endpoints are stored finite-first, ascending."""

    p: BoundaryPoint
    q: BoundaryPoint

    def __post_init__(self):
        p, q = self.p, self.q
        if _same_point(p, q):
            raise InputError("geodesic endpoints must differ")
        if is_inf(p) or (not is_inf(q) and p > q):
            p, q = q, p
        if not is_inf(p):
            p = float(p)
        if not is_inf(q):
            q = float(q)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @property
    def endpoints(self) -> tuple[BoundaryPoint, BoundaryPoint]:
        return self.p, self.q


def axis(m: Mobius) -> GeodesicLine:
    rep, att = m.fixed_points()
    return GeodesicLine(rep, att)


def normalizer(g: GeodesicLine, first: BoundaryPoint | None = None) -> Mobius:
    """Isometry sending ``g`` to the imaginary axis.

    The endpoint ``first`` (default ``g.p``) goes to 0, the other one to
    infinity.
    """
    x, y = g.p, g.q
    if first is not None:
        if _same_point(first, y):
            x, y = y, x
    if is_inf(y):
        return Mobius(1.0, -x, 0.0, 1.0)
    if is_inf(x):
        return Mobius(0.0, -1.0, 1.0, -y)
    # z -> (z - x)/(z - y) has determinant x - y; flip to keep it positive
    if x > y:
        return Mobius(1.0, -x, 1.0, -y)
    return Mobius(-1.0, x, 1.0, -y)


def _standard_pair(g1: GeodesicLine, g2: GeodesicLine) -> tuple[BoundaryPoint, BoundaryPoint]:
    n = normalizer(g1)
    return n.act_boundary(g2.p), n.act_boundary(g2.q)


def _links(x: BoundaryPoint, y: BoundaryPoint) -> bool:
    """Whether {x, y} separates 0 from infinity (after normalization)."""
    if is_inf(x) or is_inf(y):
        return False
    return (x < 0 < y) or (y < 0 < x)


def geodesics_cross(g1: GeodesicLine, g2: GeodesicLine) -> bool:
    pts = [g1.p, g1.q]
    for e in (g2.p, g2.q):
        if any(_same_point(e, f) for f in pts):
            raise SharedEndpoint("geodesics share an endpoint")
    return _links(*_standard_pair(g1, g2))


def cosh_distance(g1: GeodesicLine, g2: GeodesicLine) -> float:
    """cosh of the distance; 1.0 when the geodesics meet (here or at infinity)."""
    x, y = _standard_pair(g1, g2)
    if is_inf(x) or is_inf(y) or x == 0.0 or y == 0.0:
        return 1.0
    if (x < 0) != (y < 0):
        return 1.0
    ax, ay = abs(x), abs(y)
    return (ax + ay) / abs(ay - ax)


def geodesic_distance(g1: GeodesicLine, g2: GeodesicLine) -> float:
    x, y = _standard_pair(g1, g2)
    if is_inf(x) or is_inf(y) or x == 0.0 or y == 0.0:
        return 0.0
    if (x < 0) != (y < 0):
        return 0.0
    # cosh d = coth(w/2) with w the log-ratio of the endpoints, so sinh d = 1/sinh(w/2)
    w = abs(math.log(abs(y) / abs(x)))
    return math.asinh(1.0 / math.sinh(w / 2.0))


def common_perpendicular(g1: GeodesicLine, g2: GeodesicLine) -> tuple[PlanePoint, PlanePoint]:
    """Feet on ``g1`` and ``g2`` of the common perpendicular of disjoint geodesics."""
    n = normalizer(g1)
    x, y = n.act_boundary(g2.p), n.act_boundary(g2.q)
    if is_inf(x) or is_inf(y) or x == 0 or y == 0 or (x < 0) != (y < 0):
        raise InputError("geodesics are not disjoint")
    s = 1.0 if x > 0 else -1.0
    x, y = abs(x), abs(y)
    r = math.sqrt(x * y)
    # the perpendicular is the circle |z| = r; it meets [x, y] where
    # |z - (x+y)/2| = (y-x)/2, i.e. Re z = r^2 * 2 / (x + y)
    re = 2.0 * r * r / (x + y)
    im = math.sqrt(max(r * r - re * re, 0.0))
    inv = n.inverse()
    return inv.act_point(PlanePoint(0.0, r)), inv.act_point(PlanePoint(s * re, im))


def point_to_geodesic_distance(p: PlanePoint, g: GeodesicLine) -> float:
    w = normalizer(g)(p.z)
    return math.asinh(abs(w.real) / w.imag)


def collar_width(eps: float) -> float:
    if not eps > 0:
        raise NonPositiveLength(f"collar needs a positive length, got {eps!r}")
    return math.asinh(1.0 / math.sinh(eps / 2.0))


def hexagon_opposite(A: float, M: float) -> float:
    """Side B of the right-angled hexagon with sinh(A) sinh(B/2) = cosh(M/2)."""
    if not A > 0:
        raise NonPositiveLength(f"hexagon side must be positive, got {A!r}")
    if M < 0:
        raise NonPositiveLength(f"hexagon side must be non-negative, got {M!r}")
    return 2.0 * math.asinh(math.cosh(M / 2.0) / math.sinh(A))
