"""Surface topology, Fenchel-Nielsen coordinates and holonomy construction.

The canonical pants decomposition glues ``g`` one-holed tori onto a chain of
``g - 2`` pairs of pants (for genus 2 the two tori are glued directly). Edge
order is ``alpha_1..alpha_g`` (the handle curves ``a_i``), then the torus
boundaries ``m_1..m_g`` (a single ``mu`` in genus 2), then the separating
curves ``s_1..s_{g-3}`` between consecutive pants of the chain.

Twist convention: a positive twist on an edge moves whatever lies on the
far side of the curve to the left, as seen from either side. This is the
left-earthquake direction in the orientation of the upper half-plane model.
Twist zero means the pants seams meet on the curve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import mpmath as mp
import numpy as np
from scipy import optimize

from adsvol.errors import (
    DegenerateLength,
    DimensionMismatch,
    GenusTooSmall,
    InputError,
    NonPositiveLength,
    NotHyperbolic,
    NumericalFailure,
)
from adsvol.hypgeom import CLASS_TOLERANCE, Mobius, length_from_trace
from adsvol.words import CurveClass

MIN_LENGTH = 1e-4
RELATOR_TOLERANCE = 1e-6


@dataclass(frozen=True)
class Edge:
    name: str
    ends: tuple[tuple[int, int], tuple[int, int]]

    @property
    def is_loop(self) -> bool:
        return self.ends[0][0] == self.ends[1][0]


@dataclass(frozen=True)
class SurfaceTopology:
    genus: int
    n_pants: int
    edges: tuple[Edge, ...]

    def __post_init__(self):
        if self.n_pants != 2 * self.genus - 2 or len(self.edges) != 3 * self.genus - 3:
            raise InputError("pants graph has the wrong size for its genus")
        degree = [0] * self.n_pants
        for e in self.edges:
            for v, _ in e.ends:
                degree[v] += 1
        if any(d != 3 for d in degree):
            raise InputError(f"pants graph is not trivalent: degrees {degree}")

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def euler_char(self) -> int:
        return 2 - 2 * self.genus

    def edge_index(self, name: str) -> int:
        for i, e in enumerate(self.edges):
            if e.name == name:
                return i
        raise InputError(f"no edge named {name!r}")


def standard_topology(genus: int) -> SurfaceTopology:
    if genus < 2:
        raise GenusTooSmall(f"genus must be at least 2, got {genus}")
    g = genus
    # vertices: torus pants 0..g-1, chain pants g..2g-3
    edges = [Edge(f"alpha{i + 1}", ((i, 0), (i, 1))) for i in range(g)]
    if g == 2:
        edges.append(Edge("mu", ((0, 2), (1, 2))))
        return SurfaceTopology(g, 2, tuple(edges))
    chain = [g + j for j in range(g - 2)]
    edges.append(Edge("m1", ((0, 2), (chain[0], 0))))
    for i in range(1, g - 1):
        edges.append(Edge(f"m{i + 1}", ((i, 2), (chain[i - 1], 1))))
    edges.append(Edge(f"m{g}", ((g - 1, 2), (chain[-1], 2))))
    for k in range(1, g - 2):
        edges.append(Edge(f"s{k}", ((chain[k - 1], 2), (chain[k], 0))))
    return SurfaceTopology(g, 2 * g - 2, tuple(edges))


def _commutator_word(handle: int) -> tuple[int, ...]:
    a, b = 4 * handle, 4 * handle + 2
    return (a, b, a + 1, b + 1)


def edge_words(topo: SurfaceTopology) -> tuple[CurveClass, ...]:
    g = topo.genus
    words = [CurveClass((4 * i,)) for i in range(g)]
    if g == 2:
        words.append(CurveClass(_commutator_word(0)))
        return tuple(words)
    words += [CurveClass(_commutator_word(i)) for i in range(g)]
    for k in range(1, g - 2):
        w: tuple[int, ...] = ()
        for i in range(k + 1):
            w += _commutator_word(i)
        words.append(CurveClass(w))
    return tuple(words)


@dataclass(frozen=True)
class FNCoordinates:
    lengths: tuple[float, ...]
    twists: tuple[float, ...]

    def __post_init__(self):
        lengths = tuple(float(x) for x in self.lengths)
        twists = tuple(float(x) for x in self.twists)
        if len(lengths) != len(twists):
            raise DimensionMismatch("lengths and twists differ in size")
        if not all(math.isfinite(x) and x > 0 for x in lengths):
            raise NonPositiveLength("Fenchel-Nielsen lengths must be positive and finite")
        if not all(math.isfinite(x) for x in twists):
            raise InputError("twists must be finite")
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "twists", twists)

    def __len__(self) -> int:
        return len(self.lengths)

    def with_length(self, edge: int, value: float) -> FNCoordinates:
        lengths = list(self.lengths)
        lengths[edge] = value
        return FNCoordinates(tuple(lengths), self.twists)

    def with_twist(self, edge: int, value: float) -> FNCoordinates:
        twists = list(self.twists)
        twists[edge] = value
        return FNCoordinates(self.lengths, tuple(twists))


def parse_surface(obj: Mapping[str, Any]) -> tuple[SurfaceTopology, FNCoordinates]:
    """Validate a ``{"genus", "lengths", "twists"}`` description."""
    if not isinstance(obj, Mapping):
        raise InputError("surface description must be a JSON object")
    extra = set(obj) - {"genus", "lengths", "twists"}
    missing = {"genus", "lengths", "twists"} - set(obj)
    if extra:
        raise InputError(f"unknown fields: {sorted(extra)}")
    if missing:
        raise InputError(f"missing fields: {sorted(missing)}")
    genus = obj["genus"]
    if isinstance(genus, bool) or not isinstance(genus, int):
        raise InputError("genus must be an integer")
    topo = standard_topology(genus)
    for key in ("lengths", "twists"):
        val = obj[key]
        if not isinstance(val, list) or not all(
                isinstance(x, (int, float)) and not isinstance(x, bool) for x in val):
            raise InputError(f"{key} must be a list of numbers")
        if len(val) != topo.n_edges:
            raise InputError(f"{key} needs {topo.n_edges} entries for genus {genus}")
    return topo, FNCoordinates(tuple(obj["lengths"]), tuple(obj["twists"]))


def surface_to_json(topo: SurfaceTopology, fn: FNCoordinates) -> dict:
    return {"genus": topo.genus, "lengths": list(fn.lengths), "twists": list(fn.twists)}


# --- holonomy construction -------------------------------------------------
#
# Entries grow like exp(twist/2 + length/2), and the relator is a product
# whose factors cancel almost completely. Construction, relator and edge
# traces are therefore evaluated in mpmath at a precision scaled to the
# input; the float64 copy feeds the vectorized enumeration kernels.

def _working_dps(fn: FNCoordinates) -> int:
    spread = sum(abs(t) for t in fn.twists) + sum(fn.lengths)
    spread += 6 * len(fn.lengths) * max(1.0, -math.log(min(fn.lengths)))
    return 40 + int(2 * spread / math.log(10))


def _mat(a, b, c, d) -> np.ndarray:
    return np.array([[a, b], [c, d]], dtype=object)


def _inv(m: np.ndarray) -> np.ndarray:
    return _mat(m[1, 1], -m[0, 1], -m[1, 0], m[0, 0])


def _diag(t) -> np.ndarray:
    """Translation by ``t`` along the imaginary axis, upwards."""
    h = mp.exp(mp.mpf(t) / 2)
    return _mat(h, mp.mpf(0), mp.mpf(0), 1 / h)


def _boost(d) -> np.ndarray:
    """Translation by ``d`` along the unit semicircle, towards +1."""
    d = mp.mpf(d)
    c, s = mp.cosh(d / 2), mp.sinh(d / 2)
    return _mat(c, s, s, c)


def _fixed_points(m: np.ndarray):
    """(repelling, attracting) fixed points; None stands for infinity."""
    a, b, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    if c == 0:
        finite = b / (d - a)
        return (finite, None) if abs(a) > abs(d) else (None, finite)
    bq = d - a
    disc = mp.sqrt(bq * bq + 4 * b * c)
    s = -(bq + (disc if bq >= 0 else -disc)) / 2
    x1, x2 = s / c, -b / s
    if abs(c * x1 + d) > abs(c * x2 + d):
        return x2, x1
    return x1, x2


def _send_to_axis(rep, att) -> np.ndarray:
    """Matrix with positive determinant sending rep -> 0 and att -> infinity."""
    one, zero = mp.mpf(1), mp.mpf(0)
    if att is None:
        return _mat(one, -rep, zero, one)
    if rep is None:
        return _mat(zero, -one, one, -att)
    m = _mat(one, -rep, one, -att) if rep > att else _mat(-one, rep, one, -att)
    return m / mp.sqrt(abs(rep - att))


def _act(m: np.ndarray, x):
    if x is None:
        return None if m[1, 0] == 0 else m[0, 0] / m[1, 0]
    den = m[1, 0] * x + m[1, 1]
    return None if den == 0 else (m[0, 0] * x + m[0, 1]) / den


def _frame(x: np.ndarray, adjacent: np.ndarray) -> np.ndarray:
    """Normalizing matrix for the boundary element ``x``.

    Sends the repelling/attracting fixed points of ``x`` to 0/infinity and the
    foot of the common perpendicular towards ``axis(adjacent)`` to i.
    """
    n = _send_to_axis(*_fixed_points(x))
    p, q = (_act(n, e) for e in _fixed_points(adjacent))
    if p is None or q is None or p * q <= 0:
        raise NumericalFailure("adjacent boundary axes are not disjoint")
    return _diag(-mp.log(p * q) / 2) @ n


def _torus(alpha, twist, boundary) -> tuple[np.ndarray, np.ndarray]:
    """One-holed torus generators (a, b) with [a, b] the boundary curve.

    ``a`` translates along the imaginary axis; at zero twist the axis of ``b``
    is the unit semicircle, meeting it orthogonally.
    """
    alpha, boundary = mp.mpf(alpha), mp.mpf(boundary)
    b0 = 2 * mp.asinh(mp.cosh(boundary / 4) / mp.sinh(alpha / 2))
    return _diag(alpha), _diag(twist) @ _boost(b0)


def _pants(lx, ly, lz) -> tuple[np.ndarray, np.ndarray]:
    """Pants generators (x, y) with boundary lengths lx, ly and |tr xy| for lz."""
    lx, ly, lz = mp.mpf(lx), mp.mpf(ly), mp.mpf(lz)
    cx, cy, cz = mp.cosh(lx / 2), mp.cosh(ly / 2), mp.cosh(lz / 2)
    cosh_d = (cz + cx * cy) / (mp.sinh(lx / 2) * mp.sinh(ly / 2))
    t = _boost(mp.acosh(cosh_d))
    x = -_diag(lx)
    best = None
    for sgn in (1, -1):
        y = t @ (-_diag(sgn * ly)) @ _inv(t)
        err = abs(abs(_trace(x @ y)) - 2 * cz)
        if best is None or err < best[0]:
            best = (err, y)
    return x, best[1]


def _trace(m: np.ndarray):
    return m[0, 0] + m[1, 1]


def _glue(target, target_adj, new, new_adj, twist) -> np.ndarray:
    """Conjugator carrying ``new`` onto ``target`` with seams offset by ``twist``."""
    return _inv(_frame(target, target_adj)) @ _diag(twist) @ _frame(new, new_adj)


def _conj(g: np.ndarray, m: np.ndarray) -> np.ndarray:
    return g @ m @ _inv(g)


def _comm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b @ _inv(a) @ _inv(b)


def _spectral_norm(a, b, c, d):
    # largest singular value of [[a, b], [c, d]]
    s = a * a + b * b + c * c + d * d
    det = a * d - b * c
    return mp.sqrt((s + mp.sqrt(max(s * s - 4 * det * det, 0))) / 2)


def psl_residual(m: np.ndarray) -> float:
    """Operator-norm distance from ``m`` to the nearer of +I and -I."""
    a, b, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    return float(min(_spectral_norm(a - 1, b, c, d - 1), _spectral_norm(a + 1, b, c, d + 1)))


def _build_generators(genus: int, fn: FNCoordinates) -> np.ndarray:
    g = genus
    L, T = fn.lengths, fn.twists
    alpha = list(range(g))
    if g == 2:
        mu = 2
        a1, b1 = _torus(L[0], T[0], L[mu])
        a2, b2 = _torus(L[1], T[1], L[mu])
        k1, k2 = _comm(a1, b1), _comm(a2, b2)
        # torus pants see their boundary as k^-1; the far side sees its inverse
        c = _glue(k1, a1, _inv(k2), a2, T[mu])
        return np.array([a1, b1, _conj(c, a2), _conj(c, b2)], dtype=object)

    m_edge = [g + i for i in range(g)]
    s_edge = [2 * g + k for k in range(g - 3)]
    tori = [_torus(L[alpha[i]], T[alpha[i]], L[m_edge[i]]) for i in range(g)]
    gens = [None] * g
    gens[0] = tori[0]
    a, b = tori[0]
    # boundary element of the previous piece, with its adjacent axis
    prev, prev_adj = _inv(_comm(a, b)), a
    for j in range(g - 2):
        lx = L[m_edge[0]] if j == 0 else L[s_edge[j - 1]]
        ly = L[m_edge[j + 1]]
        lz = L[s_edge[j]] if j < g - 3 else L[m_edge[g - 1]]
        glue_twist = T[m_edge[0]] if j == 0 else T[s_edge[j - 1]]
        x0, y0 = _pants(lx, ly, lz)
        target = _inv(prev)
        c = _glue(target, prev_adj, x0, y0, glue_twist)
        x, y = target, _conj(c, y0)
        z = _inv(x @ y)
        # attach torus j+1 along y
        ta, tb = tori[j + 1]
        ct = _glue(_inv(y), x, _inv(_comm(ta, tb)), ta, T[m_edge[j + 1]])
        gens[j + 1] = (_conj(ct, ta), _conj(ct, tb))
        prev, prev_adj = z, x
    ta, tb = tori[g - 1]
    ct = _glue(_inv(prev), prev_adj, _inv(_comm(ta, tb)), ta, T[m_edge[g - 1]])
    gens[g - 1] = (_conj(ct, ta), _conj(ct, tb))
    return np.array([m for pair in gens for m in pair], dtype=object)


def _balance(gens: np.ndarray) -> np.ndarray:
    """Conjugate so that i is the point moved least by the generators.

    Minimizes sum cosh d(z, g z) over the generators, a strictly convex
    function of z; keeping the generators well conditioned is what lets the
    float64 enumeration layer multiply long words reliably.
    """
    flt = np.array([[[float(m[0, 0]), float(m[0, 1])],
                     [float(m[1, 0]), float(m[1, 1])]] for m in gens])
    a, b, c, d = flt[:, 0, 0], flt[:, 0, 1], flt[:, 1, 0], flt[:, 1, 1]
    e = d - a

    # 2 cosh d(z, gz) - 2 = |c z^2 + (d - a) z - b|^2 / y^2
    def cost(v):
        x, t = v
        y = math.exp(t)
        z = complex(x, y)
        p = c * z * z + e * z - b
        dp = 2 * c * z + e
        q = np.abs(p) ** 2
        f = float(np.sum(q)) / (y * y)
        gx = float(np.sum(2 * (np.conj(p) * dp).real)) / (y * y)
        gy = float(np.sum(-2 * (np.conj(p) * dp).imag)) / (y * y) - 2 * f / y
        # the logarithm tames the exponential scale of the raw cost
        return math.log(f), np.array([gx, gy * y]) / f

    res = optimize.minimize(cost, np.zeros(2), jac=True, method="L-BFGS-B",
                            bounds=[(-1e6, 1e6), (-60.0, 60.0)],
                            options={"gtol": 1e-12, "ftol": 1e-15})
    x, t = (mp.mpf(float(v)) for v in res.x)
    s = mp.sqrt(mp.exp(t))
    tm = _mat(s, x / s, mp.mpf(0), 1 / s)
    return np.array([_conj(_inv(tm), m) for m in gens], dtype=object)


def _mp_word(gens: np.ndarray, word: Sequence[int]) -> np.ndarray:
    m = _mat(mp.mpf(1), mp.mpf(0), mp.mpf(0), mp.mpf(1))
    for x in word:
        g = gens[x // 2]
        m = m @ (_inv(g) if x & 1 else g)
    return m


@dataclass(frozen=True, eq=False)
class HolonomyRep:
    """Holonomy of a marked hyperbolic structure in the standard generators.

    ``matrices`` holds float64 copies of ``a1, b1, ..., ag, bg``; ``exact``
    the same generators at ``dps`` decimal digits.
    """

    topology: SurfaceTopology
    fn: FNCoordinates
    matrices: np.ndarray = field(repr=False)
    exact: np.ndarray = field(repr=False)
    dps: int
    relator_residual: float
    curve_words: tuple[CurveClass, ...]

    @property
    def genus(self) -> int:
        return self.topology.genus

    @property
    def euler_abs(self) -> int:
        return 2 * self.genus - 2

    @property
    def generators(self) -> tuple[Mobius, ...]:
        return tuple(Mobius.from_matrix(m) for m in self.matrices)

    def element(self, word: Sequence[int] | CurveClass) -> np.ndarray:
        """Float64 holonomy of a word (computed at full precision, then rounded)."""
        if isinstance(word, CurveClass):
            word = word.word
        with mp.workdps(self.dps):
            m = _mp_word(self.exact, word)
            return np.array([[float(m[0, 0]), float(m[0, 1])],
                             [float(m[1, 0]), float(m[1, 1])]])

    def trace(self, word: Sequence[int] | CurveClass) -> float:
        if isinstance(word, CurveClass):
            word = word.word
        with mp.workdps(self.dps):
            return float(_trace(_mp_word(self.exact, word)))

    def edge_curve(self, edge: int) -> CurveClass:
        return self.curve_words[edge]


def build_holonomy(topo: SurfaceTopology, fn: FNCoordinates) -> HolonomyRep:
    if len(fn) != topo.n_edges:
        raise DimensionMismatch(
            f"{len(fn)} coordinates for a decomposition with {topo.n_edges} curves")
    if topo != standard_topology(topo.genus):
        raise InputError("only the canonical pants decomposition is supported")
    small = [x for x in fn.lengths if x < MIN_LENGTH]
    if small:
        raise DegenerateLength(f"lengths below {MIN_LENGTH}: {small}")
    dps = _working_dps(fn)
    with mp.workdps(dps):
        exact = _balance(_build_generators(topo.genus, fn))
        rel = _mat(mp.mpf(1), mp.mpf(0), mp.mpf(0), mp.mpf(1))
        for i in range(topo.genus):
            rel = rel @ _comm(exact[2 * i], exact[2 * i + 1])
        residual = psl_residual(rel)
        mats = np.array([[[float(m[0, 0]), float(m[0, 1])],
                          [float(m[1, 0]), float(m[1, 1])]] for m in exact])
    if not np.all(np.isfinite(mats)):
        raise NumericalFailure("holonomy matrices overflow double precision")
    if not residual <= RELATOR_TOLERANCE:
        raise NumericalFailure(f"relator residual {residual:.3e} exceeds {RELATOR_TOLERANCE}")
    return HolonomyRep(topo, fn, mats, exact, dps, residual, edge_words(topo))


def curve_length(rep: HolonomyRep, word: CurveClass | int) -> float:
    """Geodesic length of a curve class (or of a decomposition edge, by index)."""
    if isinstance(word, int):
        word = rep.curve_words[word]
    with mp.workdps(rep.dps):
        tr = abs(_trace(_mp_word(rep.exact, word.word)))
        if tr <= 2 + CLASS_TOLERANCE:
            raise NotHyperbolic(f"curve {word} has trace {float(tr)!r}")
        return float(2 * mp.acosh(tr / 2))


def trace_length(trace: float) -> float:
    return length_from_trace(trace)


def bers_constant(genus: int) -> float:
    if genus < 2:
        raise GenusTooSmall(f"genus must be at least 2, got {genus}")
    return 6.0 * math.sqrt(3.0 * math.pi) * (genus - 1)
