import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from adsvol.curves import (
    WeightedMulticurve,
    enumerate_classes,
    intersection_number,
    multicurve_length,
    primitive_root,
    thurston_ratio_lower_bound,
)
from adsvol.errors import BudgetExceeded, InputError
from adsvol.hypgeom import collar_width
from adsvol.surface import FNCoordinates, build_holonomy, curve_length, standard_topology
from adsvol.words import CurveClass, WordTree, canonical, cyclic_reduce, invert, parse_word
from oracles import crossing_oracle

letters = st.integers(0, 7)
words = st.lists(letters, min_size=1, max_size=12).map(tuple)


def _class_key(word):
    """Orbit of a cyclically reduced word under rotation and inversion (oracle)."""
    inv = tuple(x ^ 1 for x in reversed(word))
    return frozenset(w[i:] + w[:i] for w in (word, inv) for i in range(len(w)))


def _brute_force_class_count(n_letters, max_len):
    keys = set()
    for k in range(1, max_len + 1):
        for w in itertools.product(range(n_letters), repeat=k):
            if any(w[i] ^ 1 == w[(i + 1) % k] for i in range(k)) and k > 1:
                continue
            keys.add(_class_key(w))
    return len(keys)


class TestWords:
    @given(words)
    def test_canonical_idempotent(self, w):
        c = canonical(w)
        assert canonical(c) == c

    @given(words)
    def test_canonical_invariant_under_rotation_and_inversion(self, w):
        c = canonical(w)
        r = cyclic_reduce(w)
        if r:
            assert canonical(r[1:] + r[:1]) == c
        assert canonical(invert(w)) == c

    @given(words)
    def test_canonical_has_no_cancellation(self, w):
        c = canonical(w)
        for i in range(len(c)):
            if len(c) > 1:
                assert c[i] ^ 1 != c[(i + 1) % len(c)]

    def test_parse_and_format(self):
        c = CurveClass.parse("B1 A1")
        assert str(c) == "a1 b1"
        with pytest.raises(InputError):
            CurveClass.parse("a1 A1")
        with pytest.raises(InputError):
            parse_word("a3", genus=2)
        with pytest.raises(InputError):
            parse_word("x1")

    def test_primitive_root(self):
        assert primitive_root(parse_word("a1 b1 a1 b1")) == (parse_word("a1 b1"), 2)
        assert primitive_root(parse_word("a1 b1 b1")) == (parse_word("a1 b1 b1"), 1)

    def test_word_tree_budget(self, symmetric_rep):
        with pytest.raises(BudgetExceeded):
            WordTree(symmetric_rep.matrices, 5, budget=100)


class TestEnumeration:
    def test_generators(self, symmetric_rep):
        assert len(enumerate_classes(symmetric_rep, 1)) == 4

    @pytest.mark.parametrize("n", [2, 3])
    def test_count_matches_brute_force(self, symmetric_rep, n):
        assert len(enumerate_classes(symmetric_rep, n)) == _brute_force_class_count(8, n)

    def test_monotone_and_deterministic(self, symmetric_rep):
        small = enumerate_classes(symmetric_rep, 2)
        big = enumerate_classes(symmetric_rep, 3)
        assert set(small) <= set(big)
        assert enumerate_classes(symmetric_rep, 3) == big

    def test_budget(self, symmetric_rep):
        with pytest.raises(BudgetExceeded):
            enumerate_classes(symmetric_rep, 4, budget=50)


class TestMulticurve:
    def test_examples(self, symmetric_rep):
        a1, a2 = CurveClass.parse("a1"), CurveClass.parse("a2")
        assert multicurve_length(symmetric_rep, WeightedMulticurve.of([(0, 1.0)])) == \
            pytest.approx(1.0, abs=1e-12)
        assert multicurve_length(symmetric_rep, WeightedMulticurve.of([(a1, 1), (a2, 2)])) == \
            pytest.approx(3.0, abs=1e-12)
        rep = build_holonomy(standard_topology(2), FNCoordinates((2.0, 1.0, 1.0), (0, 0, 0)))
        assert multicurve_length(rep, WeightedMulticurve.of([(a1, 0.5)])) == \
            pytest.approx(1.0, abs=1e-12)

    def test_family_weight_gives_unit_length(self):
        for n in range(1, 9):
            rep = build_holonomy(standard_topology(2),
                                 FNCoordinates((1.0 / n, 1.0, 2.0), (0, 0, 0)))
            mc = WeightedMulticurve.of([(0, float(n))])
            assert multicurve_length(rep, mc) == pytest.approx(1.0, abs=1e-12)

    def test_merge_and_validation(self):
        a1 = CurveClass.parse("a1")
        mc = WeightedMulticurve.of([(a1, 1.0), (CurveClass.parse("A1"), 2.0)])
        assert mc.components == ((a1, 3.0),)
        with pytest.raises(InputError):
            WeightedMulticurve.of([(a1, 0.0)])


CASES = [("a1", "b1", 1), ("a1", "a1 b1 b1", 2), ("a1 b1", "a1 b1 b1", 1), ("b1", "a1 a1 b1", 2),
         ("a1", "b2", 0), ("a1", "a2", 0), ("a1 a2", "a1 b1 A1 B1", 2), ("b1", "a1 b1 A1 B1", 0),
         ("a1 b2", "a2 b1", 2)]


class TestIntersection:
    @pytest.mark.parametrize("c1,c2,expected", CASES)
    def test_known_counts_and_symmetry(self, symmetric_rep, c1, c2, expected):
        x, y = CurveClass.parse(c1), CurveClass.parse(c2)
        assert intersection_number(symmetric_rep, x, y, 6).count_lower_bound == expected
        assert intersection_number(symmetric_rep, y, x, 6).count_lower_bound == expected

    @pytest.mark.parametrize("c1,c2", [("a1", "b1"), ("a1", "a1 b1 b1"), ("a1 a2", "a1 b1 A1 B1"),
                                       ("a1 b2", "a2 b1"), ("a1", "a2 b1 b1 A1")])
    def test_radius_counts_match_crossing_oracle(self, twisted_rep, c1, c2):
        x, y = CurveClass.parse(c1), CurveClass.parse(c2)
        expected = crossing_oracle(twisted_rep, str(x), str(y), 3)
        assert list(intersection_number(twisted_rep, x, y, 3).counts_by_radius) == expected

    def test_self_and_powers(self, symmetric_rep):
        b1 = CurveClass.parse("b1")
        assert intersection_number(symmetric_rep, b1, b1, 5).count_lower_bound == 0
        r = intersection_number(symmetric_rep, CurveClass.parse("a1 a1"), b1, 5)
        assert r.count_lower_bound == 2

    def test_disjoint_edges_certified(self, symmetric_rep):
        r = intersection_number(symmetric_rep, CurveClass.parse("a1"), CurveClass.parse("a2"), 4)
        assert r.count_lower_bound == 0 and r.certified_exact

    def test_not_certified_below_radius(self, symmetric_rep):
        r = intersection_number(symmetric_rep, CurveClass.parse("a1"), CurveClass.parse("b1"), 2)
        assert not r.certified_exact

    def test_conjugate_word_invariance(self, twisted_rep):
        # a conjugate word names the same class once canonicalized
        c = CurveClass.parse("a1 b1 b1")
        conj = CurveClass(parse_word("b2") + c.word + parse_word("B2"))
        assert conj == c
        other = CurveClass.parse("b1")
        assert intersection_number(twisted_rep, c, other, 6).count_lower_bound == \
            intersection_number(twisted_rep, conj, other, 6).count_lower_bound

    def test_ill_conditioned_surface_stays_a_lower_bound(self):
        # a very thin a1 next to large twists: double precision cannot place
        # many lifts, so those are recomputed or reported, never miscounted
        rep = build_holonomy(standard_topology(2), FNCoordinates((0.05, 10, 3), (20, -20, 7)))
        a1, b1, a2 = (CurveClass.parse(w) for w in ("a1", "b1", "a2"))
        r = intersection_number(rep, a1, b1, 5)
        assert r.counts_by_radius == (1,) * 6
        assert r.unresolved == 0 and r.certified_exact
        # past the recheck cap the leftover lifts block certification
        r = intersection_number(rep, a1, b1, 6)
        assert r.count_lower_bound == 1
        assert r.unresolved > 0 and not r.certified_exact
        assert r.to_dict()["unresolved"] == r.unresolved
        assert intersection_number(rep, a1, a2, 5).count_lower_bound == 0

    def test_well_conditioned_surface_has_nothing_unresolved(self, twisted_rep):
        r = intersection_number(twisted_rep, CurveClass.parse("a1"), CurveClass.parse("b1"), 6)
        assert r.unresolved == 0 and r.certified_exact

    def test_collar_bound_on_enumerated_classes(self, twisted_rep):
        rep = twisted_rep
        L = max(rep.fn.lengths)
        d = collar_width(L)
        for j in range(3):
            edge = rep.curve_words[j]
            for c in enumerate_classes(rep, 3):
                i = intersection_number(rep, c, edge, 5).count_lower_bound
                assert i * d <= curve_length(rep, c) + 1e-6


class TestThurstonRatio:
    def test_identity_is_one(self, twisted_rep):
        assert thurston_ratio_lower_bound(twisted_rep, twisted_rep, 3) == 1.0

    def test_monotone_in_word_length(self, symmetric_rep, twisted_rep):
        values = [thurston_ratio_lower_bound(symmetric_rep, twisted_rep, n) for n in (1, 2, 3)]
        assert values == sorted(values)

    @pytest.mark.parametrize("n", [1, 2, 4, 8])
    def test_family_floor_and_triangle_bound(self, n):
        from adsvol.bounds import example_prop52, twist_family_surfaces
        h, h2 = twist_family_surfaces(n, 2.0)
        rep_h = build_holonomy(standard_topology(2), h)
        rep_h2 = build_holonomy(standard_topology(2), h2)
        ratio = thurston_ratio_lower_bound(rep_h, rep_h2, 1)
        report = example_prop52(n, 2.0)
        assert ratio >= report.ratio_floor - 1e-9
        beta = CurveClass.parse("b1")
        lhs = curve_length(rep_h, beta) + curve_length(rep_h2, beta)
        iota = intersection_number(rep_h, CurveClass.parse("a1"), beta, 4).count_lower_bound
        assert iota == 1
        assert lhs >= report.lamination_weight * iota
