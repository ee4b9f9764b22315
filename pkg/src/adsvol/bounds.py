"""Closed-form volume and distance bounds, energy densities and example families.

Every evaluator takes the genus explicitly and uses ``|chi| = 2g - 2``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from adsvol.errors import GenusTooSmall, InputError, NegativeLength, NonPositiveLength
from adsvol.hypgeom import hexagon_opposite
from adsvol.surface import FNCoordinates, build_holonomy, curve_length, standard_topology
from adsvol.words import CurveClass

PI2 = math.pi ** 2


def _chi(genus: int) -> int:
    if isinstance(genus, bool) or not isinstance(genus, int) or genus < 2:
        raise GenusTooSmall(f"genus must be an integer >= 2, got {genus!r}")
    return 2 * genus - 2


@dataclass(frozen=True)
class VolumeBracket:
    lower: float
    upper: float
    genus: int

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def to_dict(self) -> dict:
        return asdict(self)


def volume_bracket_from_lamination(lam_length: float, genus: int) -> VolumeBracket:
    """Convex-core volume bracket [l/4, l/4 + (pi^2/2)|chi|] from the earthquake lamination."""
    chi = _chi(genus)
    if lam_length < 0:
        raise NegativeLength(f"lamination length must be non-negative, got {lam_length!r}")
    lower = lam_length / 4.0
    return VolumeBracket(lower, lower + PI2 / 2.0 * chi, genus)


def fuchsian_volume(genus: int) -> float:
    return PI2 * _chi(genus)


def thurston_upper_bound(dth: float, genus: int) -> float:
    """(pi^2/2)|chi| + pi |chi| exp(dth), dth the smaller Thurston distance."""
    chi = _chi(genus)
    if dth < 0:
        raise InputError(f"Thurston distance must be non-negative, got {dth!r}")
    return PI2 / 2.0 * chi + math.pi * chi * math.exp(dth)


def closing_upper_bound(dth: float, genus: int, a: float) -> float:
    """(pi^2/2)|chi| + (|chi|^2 / 4a^2)(exp(dth) - 1), with ``a`` the gradient constant."""
    chi = _chi(genus)
    if dth < 0:
        raise InputError(f"Thurston distance must be non-negative, got {dth!r}")
    if not a > 0:
        raise InputError("a must be positive")
    return PI2 / 2.0 * chi + chi * chi / (4.0 * a * a) * math.expm1(dth)


def wp_lower_bound_form(dwp: float, a: float, b: float, c: float, genus: int) -> float:
    """exp(a d_WP/|chi| - b|chi|) - c, returned as-is even when negative."""
    chi = _chi(genus)
    if not a > 0:
        raise InputError("a must be positive")
    if dwp < 0:
        raise InputError("WP distance must be non-negative")
    return math.exp(a * dwp / chi - b * chi) - c


def wp_pinching(ell: float) -> float:
    """WP distance bound sqrt(2 pi l) for pinching a curve of length l."""
    if ell < 0:
        raise NegativeLength("length must be non-negative")
    return math.sqrt(2.0 * math.pi * ell)


def wp_level_distance(m: float, L: float, genus: int, a: float) -> float:
    """(|chi|/a) log(m (3g - 3) / L)."""
    chi = _chi(genus)
    if not (m > 0 and L > 0 and a > 0):
        raise InputError("m, L and a must be positive")
    return chi / a * math.log(m * (3 * genus - 3) / L)


def wp_level_diameter(L: float) -> float:
    """2 sqrt(2 pi L)."""
    if L < 0:
        raise NegativeLength("L must be non-negative")
    return 2.0 * math.sqrt(2.0 * math.pi * L)


# --- energy densities --------------------------------------------------------


@dataclass(frozen=True)
class DensityReport:
    norm_df: float
    norm_del: float
    norm_delbar: float
    schatten_trace: float
    orientation_preserving: bool

    def to_dict(self) -> dict:
        return asdict(self)


def pointwise_densities(dmatrix) -> DensityReport:
    """Norms of df, its complex-linear and antilinear parts, and tr(b_f).

    ``dmatrix`` is the differential in orthonormal frames. With singular
    values s1 >= s2, the parts have norms (s1 +- s2)/sqrt(2), the sign of s2
    following the orientation character of the map.
    """
    m = np.asarray(dmatrix, dtype=float).reshape(2, 2)
    s1, s2 = (float(x) for x in np.linalg.svd(m, compute_uv=False))
    det = float(np.linalg.det(m))
    sgn = 1.0 if det >= 0 else -1.0
    root2 = math.sqrt(2.0)
    return DensityReport(
        norm_df=math.hypot(s1, s2),
        norm_del=(s1 + sgn * s2) / root2,
        norm_delbar=(s1 - sgn * s2) / root2,
        schatten_trace=float(s1 + s2),
        orientation_preserving=det > 0,
    )


# --- example families --------------------------------------------------------


@dataclass(frozen=True)
class TwistFamilyReport:
    n: int
    base_mu_length: float
    alpha_length: float
    lamination_weight: float
    lamination_length: float
    beta_length_closed_form: float
    beta_length_hexagon: float
    beta_length_holonomy: float
    closed_form_matches_holonomy: bool
    ratio_floor: float
    ratio_floor_closed_form: float
    bracket: VolumeBracket

    def to_dict(self) -> dict:
        d = asdict(self)
        d["bracket"] = self.bracket.to_dict()
        return d


def twist_family_surfaces(n: int, base_mu_length: float) -> tuple[FNCoordinates, FNCoordinates]:
    """(h_n, h'_n) in genus 2: alpha = a1 of length 1/n, then a left twist by n along it.

    The twist by n is the earthquake along ``n * alpha``, i.e. n^2 Dehn twists.
    Other coordinates: a2 of length 1, every twist of h_n zero.
    """
    if n < 1:
        raise InputError("n must be at least 1")
    if not base_mu_length > 0:
        raise NonPositiveLength("base_mu_length must be positive")
    h = FNCoordinates((1.0 / n, 1.0, base_mu_length), (0.0, 0.0, 0.0))
    return h, h.with_twist(0, float(n))


BETA = CurveClass.parse("b1")
ALPHA = CurveClass.parse("a1")


def example_prop52(n: int, base_mu_length: float, holonomy: bool = True) -> TwistFamilyReport:
    """Bounded volume with diverging Thurston distances, in genus 2.

    ``beta_length_closed_form`` evaluates 4 asinh(cosh(l_mu/4)/sinh(1/(2n)));
    the holonomy length of the curve meeting alpha once at zero twist is
    half of it, which equals the hexagon side ``B``. The ratio floor
    -1 + n/l_beta is reported from the holonomy length (and, for reference,
    from the closed form).
    """
    h, _ = twist_family_surfaces(n, base_mu_length)
    alpha = 1.0 / n
    weight = float(n)
    lam = weight * alpha
    closed = 4.0 * math.asinh(math.cosh(base_mu_length / 4.0) / math.sinh(1.0 / (2 * n)))
    hexa = hexagon_opposite(alpha / 2.0, base_mu_length / 2.0)
    if holonomy:
        rep = build_holonomy(standard_topology(2), h)
        beta = curve_length(rep, BETA)
    else:
        beta = hexa
    matches = abs(closed - beta) <= 1e-5
    return TwistFamilyReport(
        n=n,
        base_mu_length=base_mu_length,
        alpha_length=alpha,
        lamination_weight=weight,
        lamination_length=lam,
        beta_length_closed_form=closed,
        beta_length_hexagon=hexa,
        beta_length_holonomy=beta,
        closed_form_matches_holonomy=matches,
        ratio_floor=-1.0 + n / beta,
        ratio_floor_closed_form=-1.0 + n / closed,
        bracket=volume_bracket_from_lamination(lam, 2),
    )


def fit_log_growth(base_mu_length: float, n_values=range(2, 65)) -> tuple[float, float]:
    """Least-squares (C1, C2) with l_beta(h_n) ~ C1 log n + C2; fitted, not derived."""
    ns = np.asarray(list(n_values), dtype=float)
    ys = np.array([hexagon_opposite(0.5 / n, base_mu_length / 2.0) for n in ns])
    design = np.column_stack([np.log(ns), np.ones_like(ns)])
    (c1, c2), *_ = np.linalg.lstsq(design, ys, rcond=None)
    return float(c1), float(c2)


def collar_ratio(u: float) -> float:
    """r(u) = 2 asinh(1 / (2 sinh(u/4)))."""
    if not u > 0:
        raise NonPositiveLength("u must be positive")
    return 2.0 * math.asinh(1.0 / (2.0 * math.sinh(u / 4.0)))


def _golden_max(f, lo: float, hi: float, tol: float) -> float:
    inv = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - inv * (b - a), a + inv * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - inv * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv * (b - a)
            fd = f(d)
    return (a + b) / 2.0


def optimal_constant(lo: float = 1e-3, hi: float = 50.0, tol: float = 1e-6,
                     grid: int = 2001) -> tuple[float, float]:
    """(C0, argmax u) for C0 = (3/8) max u r(u), after checking unimodality on a grid."""
    f = lambda u: u * collar_ratio(u)
    us = np.linspace(lo, hi, grid)
    vals = np.array([f(u) for u in us])
    diffs = np.sign(np.diff(vals))
    diffs = diffs[diffs != 0]
    if np.count_nonzero(diffs[1:] != diffs[:-1]) > 1:
        raise InputError("u r(u) is not unimodal on the search interval")
    u_star = _golden_max(f, lo, hi, tol)
    return 3.0 / 8.0 * f(u_star), u_star


@dataclass(frozen=True)
class GenusOptimalityReport:
    genus: int
    u: float
    weight: float
    r_u: float
    lamination_length: float
    exp_dth_upper: float
    volume_ratio_floor: float
    c0: float
    c0_argmax: float

    def to_dict(self) -> dict:
        return asdict(self)


def example_genus_optimality(genus: int, u: float, weight: float) -> GenusOptimalityReport:
    """All pants curves of length u, twisted by weight w.

    l_lambda = w (3g - 3) u; exp(d_Th) <= 1 + w / r(u); and
    Vol / (exp(d_Th) - 1) >= (3/8)|chi| u r(u).
    """
    chi = _chi(genus)
    if not u > 0:
        raise NonPositiveLength("u must be positive")
    if not weight > 0:
        raise InputError("weight must be positive")
    r = collar_ratio(u)
    c0, u_star = optimal_constant()
    return GenusOptimalityReport(
        genus=genus,
        u=u,
        weight=weight,
        r_u=r,
        lamination_length=weight * (3 * genus - 3) * u,
        exp_dth_upper=1.0 + weight / r,
        volume_ratio_floor=3.0 / 8.0 * chi * u * r,
        c0=c0,
        c0_argmax=u_star,
    )
