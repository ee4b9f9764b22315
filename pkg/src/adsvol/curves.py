"""Curve classes, weighted multicurves and intersection numbers.

Intersection counts are realized on the universal cover: a translate
``g . axis(C2)`` is linked with ``axis(C1)`` exactly when the two lifts cross,
and crossings of the closed geodesics correspond to double cosets
``<C1> g <C2>``. After normalizing ``axis(C1)`` to the imaginary axis, a
crossing lift with endpoints ``p < 0 < q`` is identified by its log-width
``log q - log|p|`` and the midpoint height ``(log|p| + log q) / 2`` taken
modulo the translation length of ``C1``.

Word products are formed in double precision. A lift whose endpoints carry
too much rounding error to be placed is recomputed from the full-precision
generators; lifts that still cannot be placed are left out of the count
and reported, so the count stays a lower bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence, Union

import mpmath as mp
import numpy as np

from adsvol.errors import BudgetExceeded, InputError, NotHyperbolic
from adsvol.hypgeom import CLASS_TOLERANCE, collar_width
from adsvol.surface import HolonomyRep, _fixed_points, _mp_word, _send_to_axis, curve_length
from adsvol.words import (
    DEFAULT_BUDGET,
    CurveClass,
    WordTree,
    canonical,
    inv_letter,
    invert,
    letter_matrices,
)

KEY_TOLERANCE = 1e-7
# endpoints within exp(-20) of 0 and infinity mark a lift equal to the axis
SAME_AXIS_LOG = 20.0
# an endpoint coordinate is trusted when its rounding error is below this
# fraction of its size
PRECISION_FLOOR = 1e-6
# words re-evaluated at full precision when double precision cannot place them
EXACT_CAP = 20_000


def primitive_root(word: Sequence[int]) -> tuple[tuple[int, ...], int]:
    """Split a cyclic word as ``root ** k`` with ``k`` maximal."""
    w = tuple(word)
    n = len(w)
    for p in range(1, n + 1):
        if n % p == 0 and w == w[:p] * (n // p):
            return w[:p], n // p
    return w, 1


def is_primitive(c: CurveClass) -> bool:
    return primitive_root(c.word)[1] == 1


def _cyclic_words(n_letters: int, length: int) -> Iterator[tuple[int, ...]]:
    """Cyclically reduced words of exactly ``length`` letters."""

    def rec(prefix: list[int]):
        if len(prefix) == length:
            if length == 1 or prefix[0] != inv_letter(prefix[-1]):
                yield tuple(prefix)
            return
        for x in range(n_letters):
            if prefix and x == inv_letter(prefix[-1]):
                continue
            prefix.append(x)
            yield from rec(prefix)
            prefix.pop()

    yield from rec([])


def _batch_traces(letters: np.ndarray, words: Sequence[tuple[int, ...]]) -> np.ndarray:
    """Traces of equal-length words, multiplied out in one vectorized sweep."""
    idx = np.asarray(words, dtype=np.int64)
    m = letters[idx[:, 0]].copy()
    for j in range(1, idx.shape[1]):
        m = m @ letters[idx[:, j]]
    return m[:, 0, 0] + m[:, 1, 1]


def enumerate_classes(rep: HolonomyRep, max_word_length: int,
                      budget: int = DEFAULT_BUDGET) -> list[CurveClass]:
    """Canonical hyperbolic classes of word length at most ``max_word_length``.

    Classes are distinct as canonical words; two words that agree only
    modulo the surface relator are both kept. Order is by length, then
    lexicographic in the letter encoding.
    """
    if max_word_length < 1:
        raise InputError("max_word_length must be at least 1")
    n_letters = 2 * len(rep.matrices)
    scanned = 0
    for k in range(1, max_word_length + 1):
        scanned += n_letters * (n_letters - 1) ** (k - 1)
    if scanned > budget:
        raise BudgetExceeded(
            f"{scanned} words up to length {max_word_length} exceed budget {budget}")
    letters = letter_matrices(rep.matrices)
    out: list[CurveClass] = []
    for k in range(1, max_word_length + 1):
        words = [w for w in _cyclic_words(n_letters, k) if canonical(w) == w]
        if not words:
            continue
        tr = np.abs(_batch_traces(letters, words))
        out.extend(CurveClass(w) for w, t in zip(words, tr) if t > 2.0 + CLASS_TOLERANCE)
    return out


Component = Union[CurveClass, int]


@dataclass(frozen=True)
class WeightedMulticurve:
    """Positive combination of curve classes or decomposition edges.

    Components repeated verbatim are merged by adding weights; an edge index
    and the class of that edge are different keys and are not merged.
    """

    components: tuple[tuple[Component, float], ...]

    def __post_init__(self):
        merged: dict = {}
        for comp, w in self.components:
            w = float(w)
            if not (math.isfinite(w) and w > 0):
                raise InputError(f"multicurve weights must be positive, got {w!r}")
            if isinstance(comp, bool) or not isinstance(comp, (CurveClass, int)):
                raise InputError(f"unsupported multicurve component {comp!r}")
            merged[comp] = merged.get(comp, 0.0) + w
        if not merged:
            raise InputError("multicurve needs at least one component")
        object.__setattr__(self, "components", tuple(merged.items()))

    @classmethod
    def of(cls, items: Iterable[tuple[Component, float]]) -> WeightedMulticurve:
        return cls(tuple(items))


def multicurve_length(rep: HolonomyRep, mc: WeightedMulticurve) -> float:
    return math.fsum(w * curve_length(rep, c) for c, w in mc.components)


@dataclass(frozen=True)
class IntersectionResult:
    count_lower_bound: int
    certified_exact: bool
    enumeration_radius: int
    counts_by_radius: tuple[int, ...] = ()
    unresolved: int = 0

    def to_dict(self) -> dict:
        return {
            "unresolved": self.unresolved,
            "count_lower_bound": self.count_lower_bound,
            "certified_exact": self.certified_exact,
            "enumeration_radius": self.enumeration_radius,
            "counts_by_radius": list(self.counts_by_radius),
        }


def _fixed_points_h(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Homogeneous (repelling, attracting) fixed points of a hyperbolic matrix."""
    a, b, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    tr = a + d
    if abs(tr) <= 2.0 + CLASS_TOLERANCE:
        raise NotHyperbolic(f"trace {tr!r} does not exceed 2")
    if tr < 0:
        a, b, c, d = -a, -b, -c, -d
    root = math.sqrt((a + d) ** 2 - 4.0)
    lam_big = ((a + d) + root) / 2.0
    lam_small = 1.0 / lam_big
    # eigenvector for eigenvalue lam: (b, lam - a) or (lam - d, c)
    def vec(lam: float) -> np.ndarray:
        v1 = np.array([b, lam - a])
        v2 = np.array([lam - d, c])
        return v1 if np.hypot(*v1) >= np.hypot(*v2) else v2

    return vec(lam_small), vec(lam_big)


def _axis_normalizer(m: np.ndarray) -> np.ndarray:
    """Matrix sending the repelling/attracting fixed points of ``m`` to 0 and infinity."""
    rep, att = _fixed_points_h(m)
    # columns of the inverse are the images of 0 = (0, 1) and inf = (1, 0)
    inv = np.column_stack([att, rep])
    if np.linalg.det(inv) < 0:
        inv[:, 1] = -inv[:, 1]
    inv /= math.sqrt(np.linalg.det(inv))
    return np.array([[inv[1, 1], -inv[0, 1]], [-inv[1, 0], inv[0, 0]]])


def _log_coords(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Log-modulus and sign of the boundary points ``x[..., 0] / x[..., 1]``."""
    with np.errstate(divide="ignore", invalid="ignore"):
        lx = np.log(np.abs(x[:, 0])) - np.log(np.abs(x[:, 1]))
    return lx, np.sign(x[:, 0]) * np.sign(x[:, 1])


def _exact_endpoints(rep: HolonomyRep, root1: Sequence[int], word2: Sequence[int],
                     words: list[tuple[int, ...]], bound: np.ndarray):
    """Endpoint data of ``g . axis(C2)`` computed entirely from the full-precision generators.

    The frame of ``axis(C1)``, the endpoints of ``C2`` and the products ``g``
    all come from ``rep.exact``, so rows computed here share one coordinate
    system. ``bound`` is the double-precision rounding bound of each word,
    rescaled to the working precision to decide which rows are trustworthy.
    """
    out = np.zeros((len(words), 5))
    scale = 10.0 ** (-rep.dps) / np.finfo(float).eps
    with mp.workdps(rep.dps):
        frame = _send_to_axis(*_fixed_points(_mp_word(rep.exact, root1)))
        vecs = [np.array([mp.mpf(1), mp.mpf(0)] if x is None else [x, mp.mpf(1)], dtype=object)
                for x in _fixed_points(_mp_word(rep.exact, word2))]
        frame_norm = float(mp.sqrt(sum(x * x for x in frame.flat)))
        for i, w in enumerate(words):
            m = frame @ _mp_word(rep.exact, w)
            row = []
            ok = True
            for e in vecs:
                v = m @ e
                size = float(min(abs(v[0]), abs(v[1])))
                e_norm = float(mp.sqrt(e[0] ** 2 + e[1] ** 2))
                ok &= bound[i] * scale * frame_norm * e_norm <= PRECISION_FLOOR * size
                if v[0] == 0 or v[1] == 0:
                    row += [math.inf, 0.0]
                else:
                    row += [float(mp.log(abs(v[0])) - mp.log(abs(v[1]))),
                            float(mp.sign(v[0]) * mp.sign(v[1]))]
            out[i] = row + [1.0 if ok else 0.0]
    return out[:, 0], out[:, 1], out[:, 2], out[:, 3], out[:, 4].astype(bool)


def _crossing_keys(rep: HolonomyRep, c1: CurveClass, c2: CurveClass,
                   tree: WordTree) -> tuple[np.ndarray, np.ndarray, np.ndarray, float, int]:
    """Per-word crossing flag and (width, height) keys of the lifts of ``c2``.

    Words whose double-precision endpoints are too inaccurate to decide on
    which side of the axis they fall are recomputed from the full-precision
    generators, shortest first and at most ``EXACT_CAP`` of them, together
    with all crossing candidates; the number of words left
    undecided is returned last.
    """
    root1, _ = primitive_root(c1.word)
    m1 = rep.element(root1)
    ell1 = curve_length(rep, CurveClass(root1))
    n1 = _axis_normalizer(m1)
    e_rep, e_att = _fixed_points_h(rep.element(c2))
    imgs = n1[None] @ tree.mats
    x1 = imgs @ e_rep
    x2 = imgs @ e_att
    lp, sp = _log_coords(x1)
    lq, sq = _log_coords(x2)
    bound = tree.rounding_bound(float(np.sqrt(np.sum(n1 ** 2))))
    with np.errstate(invalid="ignore", over="ignore"):
        trusted = ((bound * np.linalg.norm(e_rep) <= PRECISION_FLOOR * np.min(np.abs(x1), axis=1))
                   & (bound * np.linalg.norm(e_att) <= PRECISION_FLOOR * np.min(np.abs(x2), axis=1)))
    # g and g * C2 (or C1 * g) name the same lift; keep the shorter word only
    redundant = tree.affix_mask(prefixes=(root1, invert(root1)),
                                suffixes=(c2.word, invert(c2.word)))
    # lifts equal to axis(C1) need no decision
    same_axis = np.minimum(np.abs(lp), np.abs(lq)) > SAME_AXIS_LOG
    doubtful = np.flatnonzero(~trusted & ~redundant & ~(same_axis & np.isfinite(lp + lq)))
    if len(doubtful):
        # rows are in breadth-first order, so the shortest words are rechecked
        # first; crossing candidates are recomputed too so that every key used
        # for deduplication lives in the same full-precision frame
        candidates = np.flatnonzero(trusted & ~redundant & ~same_axis & (sp * sq < 0))
        redo = np.union1d(doubtful[:EXACT_CAP], candidates)
        words = [tree.word(int(i)) for i in redo]
        lp[redo], sp[redo], lq[redo], sq[redo], ok = _exact_endpoints(
            rep, root1, c2.word, words, bound[redo])
        trusted[redo] = ok
    undecided = ~trusted & ~redundant
    finite = np.isfinite(lp) & np.isfinite(lq)
    # a lift of the same closed geodesic may coincide with axis(C1)
    same_axis = np.minimum(np.abs(lp), np.abs(lq)) > SAME_AXIS_LOG
    cross = finite & (sp * sq < 0) & ~same_axis & ~redundant & trusted
    with np.errstate(invalid="ignore"):
        width = np.abs(lq - lp)
        height = np.mod((lp + lq) / 2.0, ell1)
    return cross, width, height, ell1, int(np.count_nonzero(undecided & ~same_axis))


def _distinct(width: np.ndarray, height: np.ndarray, period: float,
              tol: float = KEY_TOLERANCE, group: np.ndarray | None = None) -> list[int]:
    """Indices of keys distinct up to ``tol`` (height taken modulo ``period``).

    Keys in different ``group`` classes never match. The first occurrence
    wins, so shorter words represent their class.
    """
    if group is None:
        group = np.zeros(len(width), dtype=np.int64)
    cells: dict[tuple[int, int, int], list[int]] = {}
    n_cells = max(1, int(period / tol))
    keep: list[int] = []
    for i in range(len(width)):
        w, h, g = width[i], height[i], int(group[i])
        cw, ch = int(w / tol), int(h / tol) % n_cells
        dup = False
        for dw in (-1, 0, 1):
            for dh in (-1, 0, 1):
                for j in cells.get((g, cw + dw, (ch + dh) % n_cells), ()):
                    gap = abs(height[j] - h)
                    gap = min(gap, period - gap)
                    if abs(width[j] - w) <= tol and gap <= tol:
                        dup = True
                        break
                if dup:
                    break
            if dup:
                break
        if not dup:
            cells.setdefault((g, cw, ch), []).append(i)
            keep.append(i)
    return keep


def default_cert_radius(c1: CurveClass, c2: CurveClass) -> int:
    return len(c1) + len(c2) + 2


def intersection_number(rep: HolonomyRep, c1: CurveClass, c2: CurveClass, radius: int,
                        budget: int = DEFAULT_BUDGET,
                        cert_radius: int | None = None) -> IntersectionResult:
    """Geometric intersection number by counting linked lifts.

    The count is a lower bound at every radius. ``certified_exact`` is a
    heuristic flag: radius at least ``cert_radius``, the count unchanged over
    the last two radius increments, the collar inequality
    ``count * collar_width(l_other) <= l_this`` consistent in both directions,
    and no lift left undecided by rounding (``unresolved``).
    Proper powers contribute with multiplicity ``k1 * k2``.
    """
    if radius < 0:
        raise InputError("radius must be non-negative")
    tree = WordTree(rep.matrices, radius, budget)
    root1, k1 = primitive_root(c1.word)
    root2, k2 = primitive_root(c2.word)
    cross, width, height, ell1, unresolved = _crossing_keys(
        rep, CurveClass(root1), CurveClass(root2), tree)
    rows = np.flatnonzero(cross)
    keep = _distinct(width[rows], height[rows], ell1)
    kept_len = tree.length[rows[keep]]
    counts = tuple(int(np.count_nonzero(kept_len <= r)) * k1 * k2 for r in range(radius + 1))
    count = counts[-1]
    if cert_radius is None:
        cert_radius = default_cert_radius(c1, c2)
    stable = radius >= 2 and counts[-1] == counts[-2] == counts[-3]
    l1, l2 = curve_length(rep, c1), curve_length(rep, c2)
    collar_ok = (count * collar_width(l2) <= l1 + 1e-6
                 and count * collar_width(l1) <= l2 + 1e-6)
    certified = radius >= cert_radius and stable and collar_ok and unresolved == 0
    return IntersectionResult(count, certified, radius, counts, unresolved)


def thurston_ratio_lower_bound(rep_h: HolonomyRep, rep_h2: HolonomyRep, max_word_length: int,
                               budget: int = DEFAULT_BUDGET) -> float:
    """max over enumerated classes of l_c(h') / l_c(h); a lower bound on exp(d_Th)."""
    if rep_h.genus != rep_h2.genus:
        raise InputError("both structures must have the same genus")
    classes = enumerate_classes(rep_h, max_word_length, budget)
    la, lb = letter_matrices(rep_h.matrices), letter_matrices(rep_h2.matrices)
    best = 0.0
    by_len: dict[int, list[tuple[int, ...]]] = {}
    for c in classes:
        by_len.setdefault(len(c), []).append(c.word)
    for words in by_len.values():
        ta = np.abs(_batch_traces(la, words))
        tb = np.abs(_batch_traces(lb, words))
        ratio = np.arccosh(tb / 2.0) / np.arccosh(ta / 2.0)
        best = max(best, float(np.max(ratio)))
    return best
