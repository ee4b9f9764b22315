"""Words in the standard generators of a closed surface group.

Generators are ordered ``a1, b1, a2, b2, ...``. A letter is an integer:
generator ``k`` (0-based in that order) is ``2k`` and its inverse ``2k + 1``.
Text form uses ``a1``/``b1`` for generators and ``A1``/``B1`` for inverses.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from adsvol.errors import BudgetExceeded, InputError

DEFAULT_BUDGET = 2_000_000

_TOKEN = re.compile(r"([aAbB])(\d+)")


def inv_letter(x: int) -> int:
    return x ^ 1


def invert(word: Sequence[int]) -> tuple[int, ...]:
    return tuple(inv_letter(x) for x in reversed(word))


def free_reduce(word: Iterable[int]) -> tuple[int, ...]:
    out: list[int] = []
    for x in word:
        if out and out[-1] == inv_letter(x):
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def cyclic_reduce(word: Iterable[int]) -> tuple[int, ...]:
    w = list(free_reduce(word))
    while len(w) >= 2 and w[0] == inv_letter(w[-1]):
        w = w[1:-1]
    return tuple(w)


def canonical(word: Sequence[int]) -> tuple[int, ...]:
    """Lexicographically least rotation of the word or of its inverse."""
    w = cyclic_reduce(word)
    if not w:
        return w
    best = None
    for cand in (w, invert(w)):
        for i in range(len(cand)):
            r = cand[i:] + cand[:i]
            if best is None or r < best:
                best = r
    return best


def letter_name(x: int) -> str:
    gen, inv = divmod(x, 2)
    handle, which = divmod(gen, 2)
    ch = "ab"[which]
    return f"{ch.upper() if inv else ch}{handle + 1}"


def format_word(word: Sequence[int]) -> str:
    return " ".join(letter_name(x) for x in word)


def parse_word(text: str, genus: int | None = None) -> tuple[int, ...]:
    compact = text.replace(" ", "").replace("*", "")
    tokens = _TOKEN.findall(compact)
    if not tokens or "".join(a + b for a, b in tokens) != compact:
        raise InputError(f"cannot parse word {text!r}")
    out = []
    for ch, num in tokens:
        handle = int(num) - 1
        if handle < 0 or (genus is not None and handle >= genus):
            raise InputError(f"generator {ch}{num} out of range")
        gen = 2 * handle + (ch.lower() == "b")
        out.append(2 * gen + ch.isupper())
    return tuple(out)


@dataclass(frozen=True, order=True)
class CurveClass:
    """Free homotopy class of a closed curve, kept in canonical cyclic form."""

    word: tuple[int, ...]

    def __post_init__(self):
        w = canonical(tuple(int(x) for x in self.word))
        if not w:
            raise InputError("curve word reduces to the trivial element")
        object.__setattr__(self, "word", w)

    @classmethod
    def parse(cls, text: str, genus: int | None = None) -> CurveClass:
        return cls(parse_word(text, genus))

    def __len__(self) -> int:
        return len(self.word)

    def __str__(self) -> str:
        return format_word(self.word)

    def power(self, k: int) -> CurveClass:
        return CurveClass(self.word * k)

    def max_generator(self) -> int:
        return max(x // 2 for x in self.word)


def word_matrix(gens: np.ndarray, word: Sequence[int]) -> np.ndarray:
    """Product of generator matrices along ``word`` (determinant renormalized)."""
    m = np.eye(2)
    for x in word:
        g = gens[x // 2]
        if x & 1:
            g = np.array([[g[1, 1], -g[0, 1]], [-g[1, 0], g[0, 0]]])
        m = m @ g
        m = m / np.sqrt(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])
    return m


def letter_matrices(gens: np.ndarray) -> np.ndarray:
    """Array indexed by letter: generators interleaved with their inverses."""
    n = len(gens)
    out = np.empty((2 * n, 2, 2))
    out[0::2] = gens
    out[1::2, 0, 0] = gens[:, 1, 1]
    out[1::2, 0, 1] = -gens[:, 0, 1]
    out[1::2, 1, 0] = -gens[:, 1, 0]
    out[1::2, 1, 1] = gens[:, 0, 0]
    return out


def count_reduced_words(n_letters: int, radius: int) -> int:
    """Number of freely reduced words of length <= radius (identity included)."""
    total, level = 1, n_letters
    for _ in range(radius):
        total += level
        level *= n_letters - 1
    return total


class WordTree:
    """All freely reduced words up to a given length, breadth first.

    Row 0 is the empty word. ``parent[i]``/``last[i]`` give the prefix row and
    final letter, ``length[i]`` the word length, ``mats[i]`` the holonomy.
    Level ``k`` occupies rows ``offsets[k]:offsets[k+1]``.
    """

    def __init__(self, gens: np.ndarray, radius: int, budget: int = DEFAULT_BUDGET):
        if radius < 0:
            raise InputError("radius must be non-negative")
        n_letters = 2 * len(gens)
        size = count_reduced_words(n_letters, radius)
        if size > budget:
            raise BudgetExceeded(f"{size} words at radius {radius} exceed budget {budget}")
        # Letters are renormalized once. Products are left alone: their
        # determinant drifts by a few ulps per letter, while dividing by a
        # determinant computed from large entries would inject far more error.
        letters = letter_matrices(np.asarray(gens, dtype=float))
        det = letters[:, 0, 0] * letters[:, 1, 1] - letters[:, 0, 1] * letters[:, 1, 0]
        # a determinant far from 1 here is cancellation in det itself, not drift
        ok = np.isfinite(det) & (det > 0.5) & (det < 2.0)
        letters /= np.where(ok, np.sqrt(np.where(ok, det, 1.0)), 1.0)[:, None, None]
        letter_norm = np.sqrt(np.sum(letters ** 2, axis=(1, 2)))
        parent = [np.array([-1])]
        last = [np.array([-1])]
        mats = [np.eye(2)[None]]
        growth = [np.array([1.0])]
        offsets = [0, 1]
        prev_last = np.array([-1])
        prev_mats = mats[0]
        prev_rows = np.array([0])
        for _ in range(radius):
            # every letter except the inverse of the previous one
            cand = np.arange(n_letters)
            p_idx = np.repeat(np.arange(len(prev_rows)), n_letters)
            l_idx = np.tile(cand, len(prev_rows))
            ok = l_idx != (prev_last[p_idx] ^ 1)
            p_idx, l_idx = p_idx[ok], l_idx[ok]
            new = prev_mats[p_idx] @ letters[l_idx]
            with np.errstate(over="ignore"):
                growth.append(growth[-1][p_idx] * letter_norm[l_idx])
            parent.append(prev_rows[p_idx])
            last.append(l_idx)
            mats.append(new)
            start = offsets[-1]
            offsets.append(start + len(l_idx))
            prev_rows = np.arange(start, start + len(l_idx))
            prev_last, prev_mats = l_idx, new
        self.radius = radius
        self.n_letters = n_letters
        self.parent = np.concatenate(parent)
        self.last = np.concatenate(last)
        self.mats = np.concatenate(mats)
        self.growth = np.concatenate(growth)
        self.offsets = offsets
        self.length = np.concatenate(
            [np.full(offsets[k + 1] - offsets[k], k) for k in range(radius + 1)])

    def __len__(self) -> int:
        return len(self.mats)

    def word(self, row: int) -> tuple[int, ...]:
        out = []
        while row > 0:
            out.append(int(self.last[row]))
            row = int(self.parent[row])
        return tuple(reversed(out))

    def letters(self) -> np.ndarray:
        """Word of every row as an array padded with -1 on the right."""
        out = np.full((len(self.mats), max(self.radius, 1)), -1, dtype=np.int64)
        for k in range(1, self.radius + 1):
            rows = slice(self.offsets[k], self.offsets[k + 1])
            out[rows, :k - 1] = out[self.parent[rows], :k - 1]
            out[rows, k - 1] = self.last[rows]
        return out

    def affix_mask(self, prefixes: Sequence[Sequence[int]] = (),
                   suffixes: Sequence[Sequence[int]] = ()) -> np.ndarray:
        """Rows whose word starts with one of ``prefixes`` or ends with one of ``suffixes``."""
        arr = self.letters()
        mask = np.zeros(len(arr), dtype=bool)
        for w in prefixes:
            n = len(w)
            if 0 < n <= self.radius:
                mask |= np.all(arr[:, :n] == np.asarray(w), axis=1)
        for w in suffixes:
            n = len(w)
            for k in range(n, self.radius + 1):
                rows = slice(self.offsets[k], self.offsets[k + 1])
                mask[rows] |= np.all(arr[rows, k - n:k] == np.asarray(w), axis=1)
        return mask

    def rounding_bound(self, conj_norm: float = 1.0) -> np.ndarray:
        """Bound on the entrywise rounding error of each product.

        Each product of ``k`` letters carries at most about ``2k`` roundings
        relative to the product of the letter norms. ``conj_norm`` is the
        norm factor of a conjugation applied afterwards.
        """
        with np.errstate(over="ignore"):
            return 4.0 * (self.length + 2) * np.finfo(float).eps * self.growth * conj_norm

    def rows_upto(self, k: int) -> slice:
        return slice(0, self.offsets[min(k, self.radius) + 1])


def iter_reduced_words(n_letters: int, length: int) -> Iterator[tuple[int, ...]]:
    """Freely reduced words of exactly ``length`` letters, lexicographic order."""
    if length == 0:
        yield ()
        return

    def rec(prefix: list[int]):
        if len(prefix) == length:
            yield tuple(prefix)
            return
        for x in range(n_letters):
            if prefix and x == inv_letter(prefix[-1]):
                continue
            prefix.append(x)
            yield from rec(prefix)
            prefix.pop()

    yield from rec([])
