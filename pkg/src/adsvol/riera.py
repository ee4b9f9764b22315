"""Truncated Riera series for the Weil-Petersson gradient of a length function.

For a simple closed geodesic ``c`` with holonomy ``C``,

    |grad l_c|^2 = (2/pi) l_c + (2/pi) * sum_D F(u(D)),
    F(u) = u log((u + 1)/(u - 1)) - 2,

the sum running over the nontrivial double cosets ``<C> D <C>`` and ``u(D)``
being the cosh of the distance between ``axis(C)`` and ``D . axis(C)``. Every
term is positive, so summing the cosets reached by words of length at most
``word_radius`` gives a lower bound.

With ``axis(C)`` normalized to the imaginary axis, a disjoint translate with
endpoints ``p, q`` of the same sign and log-width ``w = |log(q/p)|`` has
``u = coth(w/2)``, which makes ``F(u) = w coth(w/2) - 2``.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from adsvol.curves import KEY_TOLERANCE, _axis_normalizer, _distinct, primitive_root
from adsvol.errors import InputError, NotSimple
from adsvol.surface import HolonomyRep, curve_length
from adsvol.words import DEFAULT_BUDGET, CurveClass, WordTree, invert

NEAR_TANGENT = 1e-7
# Translates narrower than this sit so far away that double precision cannot
# tell them apart; each would contribute less than WIDTH_FLOOR**2 / 6.
WIDTH_FLOOR = 1e-9
IDENTITY_TOLERANCE = 1e-9
# Largest admissible relative rounding error in the off-diagonal entries b, c.
PRECISION_FLOOR = 1e-6


@dataclass(frozen=True)
class RieraReport:
    base_term: float
    series_sum: float
    lower_bound: float
    n_terms: int
    word_radius: int
    crossing_detected: bool
    skipped_near_tangent: int = 0
    skipped_unresolved: int = 0
    min_u: float = math.inf
    skipped_imprecise: int = 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["min_u"] = None if math.isinf(self.min_u) else self.min_u
        return d


def riera_term(w: float) -> float:
    """F(u) at u = coth(w/2), i.e. ``w coth(w/2) - 2``, without cancellation."""
    if w < 1e-3:
        w2 = w * w
        return w2 / 6.0 - w2 * w2 / 360.0
    # w coth(w/2) = w + 2w/(e^w - 1)
    return w - 2.0 + 2.0 * w / math.expm1(w)


def riera_term_u(u: float) -> float:
    """F(u) = u log((u + 1)/(u - 1)) - 2 for u > 1."""
    if not u > 1:
        raise InputError(f"u must exceed 1, got {u!r}")
    return u * math.log1p(2.0 / (u - 1.0)) - 2.0


def default_threads() -> int:
    env = os.environ.get("ADSVOL_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise InputError(f"ADSVOL_THREADS must be an integer, got {env!r}") from None
        if n < 1:
            raise InputError("ADSVOL_THREADS must be at least 1")
        return n
    return 1


def _translate_keys(mats: np.ndarray, norm: np.ndarray,
                    err: np.ndarray) -> tuple[np.ndarray, ...]:
    """Key data of ``D . axis(C)`` in the frame where ``axis(C) = (0, inf)``.

    The translate has endpoints ``p = b/d`` and ``q = a/c``. Since ``ad - bc = 1``,
    ``q/p = 1 + 1/(bc)``: the endpoints have the same sign unless
    ``-1 < bc < 0`` (crossing), and the log-width is ``|log1p(1/(bc))|``,
    accurate even for far-away translates whose endpoints nearly coincide.
    ``err`` bounds the rounding error of each conjugated entry; rows where it
    is not small against ``b`` and ``c`` are flagged imprecise.
    """
    ninv = np.array([[norm[1, 1], -norm[0, 1]], [-norm[1, 0], norm[0, 0]]])
    dp = norm[None] @ mats @ ninv[None]
    a, b, c, d = dp[:, 0, 0], dp[:, 0, 1], dp[:, 1, 0], dp[:, 1, 1]
    scale = np.maximum(np.abs(a), np.abs(d))
    ident = (np.abs(b) <= IDENTITY_TOLERANCE * scale) & (np.abs(c) <= IDENTITY_TOLERANCE * scale)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        bc = b * c
        cross = (bc < 0) & (bc > -1) & ~ident
        width = np.abs(np.log1p(1.0 / bc))
        height = (np.log(np.abs(a)) + np.log(np.abs(b)) - np.log(np.abs(c)) - np.log(np.abs(d))) / 2
        imprecise = ~(err * (1.0 / np.abs(b) + 1.0 / np.abs(c)) <= PRECISION_FLOOR)
    side = np.sign(b) * np.sign(d)
    return ident, cross & ~imprecise, side, width, height, imprecise & ~ident


def wp_grad_normsq_lower(rep: HolonomyRep, c: CurveClass, word_radius: int,
                         budget: int = DEFAULT_BUDGET, threads: int | None = None) -> RieraReport:
    """Certified lower bound on the squared WP gradient norm of ``l_c``.

    Raises ``NotSimple`` when some enumerated translate of ``axis(C)`` crosses
    it. Near-tangent translates (distance at most 1e-7), unresolvably far
    ones (log-width below 1e-9) and words whose double-precision product is
    too inaccurate to place the translate are skipped and counted; dropping
    positive terms keeps the bound valid. Crossings are only detected among
    the words that are placed accurately. The sum over the
    distinct cosets uses ``math.fsum``, so the result does not depend on the
    thread count.
    """
    if word_radius < 0:
        raise InputError("word_radius must be non-negative")
    root, k = primitive_root(c.word)
    if k > 1:
        raise NotSimple(f"{c} is a proper power and not simple")
    ell = curve_length(rep, c)
    base = 2.0 / math.pi * ell
    if word_radius == 0:
        return RieraReport(base, 0.0, base, 0, 0, False)
    threads = default_threads() if threads is None else threads
    if threads < 1:
        raise InputError("threads must be at least 1")
    tree = WordTree(rep.matrices, word_radius, budget)
    norm = _axis_normalizer(rep.element(c))
    err = tree.rounding_bound(float(np.sum(norm ** 2)))

    chunks = np.array_split(np.arange(len(tree)), threads)
    if threads == 1:
        parts = [_translate_keys(tree.mats, norm, err)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda idx: _translate_keys(tree.mats[idx], norm, err[idx]),
                                  chunks))
    ident, cross, side, width, height, imprecise = (np.concatenate(x) for x in zip(*parts))

    redundant = tree.affix_mask(prefixes=(c.word, invert(c.word)),
                                suffixes=(c.word, invert(c.word)))
    if np.any(cross & ~redundant):
        raise NotSimple(f"a translate of the axis of {c} crosses it")
    ok = np.isfinite(width) & np.isfinite(height) & (width > 0)
    dropped = imprecise & ~redundant
    candidates = ~ident & ~redundant & ~cross & ~imprecise
    far = candidates & ~(ok & (width >= WIDTH_FLOOR))
    rows = np.flatnonzero(candidates & ~far)
    # far translates have tiny widths, so widths are compared on a log scale;
    # translates on the negative and positive side never share a key
    keep = _distinct(np.log(width[rows]), np.mod(height[rows], ell), ell, KEY_TOLERANCE,
                     group=(side[rows] > 0))
    widths = width[rows][keep]
    # distance = asinh(1/sinh(w/2)) <= 1e-7 for large w
    dist = np.arcsinh(1.0 / np.sinh(np.minimum(widths, 700.0) / 2.0))
    tangent = dist <= NEAR_TANGENT
    terms = [riera_term(float(w)) for w in widths[~tangent]]
    series = 2.0 / math.pi * math.fsum(terms)
    min_u = float(np.min(1.0 / np.tanh(widths[~tangent] / 2.0))) if terms else math.inf
    return RieraReport(base, series, base + series, len(terms), word_radius, False,
                       int(np.count_nonzero(tangent)), _distinct_far(far, width, height, ell),
                       min_u, int(np.count_nonzero(dropped)))


def _distinct_far(far: np.ndarray, width: np.ndarray, height: np.ndarray, ell: float) -> int:
    """Rough count of distinct unresolved translates, for reporting only."""
    idx = np.flatnonzero(far)
    if len(idx) == 0:
        return 0
    key = np.round(np.mod(np.nan_to_num(height[idx]), ell), 6)
    return int(len(np.unique(key)))


def mainestimate_ratio(rep: HolonomyRep, c: CurveClass, word_radius: int,
                       budget: int = DEFAULT_BUDGET, threads: int | None = None) -> float:
    """sqrt(lower bound) * |chi| / l_c: an empirical lower estimate of the constant a."""
    report = wp_grad_normsq_lower(rep, c, word_radius, budget, threads)
    return math.sqrt(report.lower_bound) * rep.euler_abs / curve_length(rep, c)
