from fractions import Fraction as F
import random

import pytest

from parsheaf.base_chart import BaseGeometry, Chart, HilbertPoly, standard_log_point
from parsheaf.monoid_lattice import KummerExtension
from parsheaf.parabolic_core import (direct_sum, embed_slice, is_isomorphic, shift, single_node, trivial_parabolic,
                                     zero_sheaf)
from parsheaf.repro import (chart_e_double_prime, chart_l_prime, non_simplicial_pullback, slice_point_sheaf)
from parsheaf.root_ops import ExtensionStep, pullback
from parsheaf.stability import (CoordinateSubsheaf, GeneratingChart, StabilityError, brute_force_verdict,
                                classify_nonstable_pullback, enumerate_coordinate_subsheaves, hn_filtration,
                                is_closed, is_polystable, jh_factors, jh_graded, mean_value, modified_hilbert,
                                s_equivalent, slope, subsheaf_slope, verdict, weighted_mean)

from corpus import base_charts, random_sheaf, tower_corpus

P = HilbertPoly.of
H = F(1, 2)


def p1(n=1):
    return Chart(KummerExtension.free(1, n), BaseGeometry.p1(), [[1]], [])


def point_pullback(m=2):
    o = trivial_parabolic(standard_log_point(1, 1), [()])
    return pullback(o, ExtensionStep.levels(1, 1, m))


class TestHilbert:
    def test_quadric_trivial(self):
        f = trivial_parabolic(chart_l_prime(), [(2, 0)])
        assert modified_hilbert(f) == P(2, 3, 1) * 4

    def test_zero(self):
        assert modified_hilbert(zero_sheaf(chart_l_prime())).is_zero()
        with pytest.raises(StabilityError):
            slope(zero_sheaf(chart_l_prime()))

    @pytest.mark.parametrize("genus", [0, 1, 3])
    def test_non_simplicial_with_genus(self, genus):
        d = 4
        f = non_simplicial_pullback(d, genus)
        assert modified_hilbert(f) == P(12 * d - 34 + 12 * (1 - genus), 12)
        assert slope(f) == P(d - F(17, 6) + 1 - genus, 1)


class TestSlope:
    def test_standard_chart(self):
        for e in [(2, 0), (1, 1)]:
            assert slope(trivial_parabolic(chart_l_prime(), [e]), None, "monic") == P(2, 3, 1)

    def test_second_chart(self):
        g = chart_e_double_prime()
        assert slope(trivial_parabolic(chart_l_prime(), [(2, 0)]), g, "monic") == P(H, F(3, 2), 1)
        assert slope(trivial_parabolic(chart_l_prime(), [(1, 1)]), g, "monic") == P(-1, F(3, 2), 1)

    def test_factorial_differs_by_constant(self):
        f = trivial_parabolic(chart_l_prime(), [(2, 0)])
        assert slope(f) * 2 == slope(f, None, "monic")

    def test_chart_check(self):
        bad = GeneratingChart(KummerExtension.free(1, 2))
        with pytest.raises(StabilityError):
            slope(trivial_parabolic(chart_l_prime(), [(0, 0)]), bad)


class TestWeightedMean:
    def test_single_piece(self):
        terms = weighted_mean(trivial_parabolic(p1(1), [(3,)]))
        assert [t.gamma for t in terms] == [1]

    def test_quarters(self):
        terms = weighted_mean(trivial_parabolic(chart_l_prime(), [(2, 0)]))
        assert [t.gamma for t in terms] == [F(1, 4)] * 4

    def test_grouped_by_piece(self):
        f = trivial_parabolic(chart_l_prime(), [(2, 0)])
        terms = weighted_mean(f, chart_e_double_prime(), "monic", group="piece")
        assert [t.gamma for t in terms] == [F(5, 8), F(1, 4), F(1, 8)]
        assert sum(t.count for t in terms) == 16
        assert mean_value(terms) == slope(f, chart_e_double_prime(), "monic")

    def test_recovers_slope_on_random_sheaves(self):
        for f, _, _ in tower_corpus(15, seed=3):
            terms = weighted_mean(f)
            assert sum(t.gamma for t in terms) == 1
            assert mean_value(terms) == slope(f)


class TestEnumeration:
    def test_single_node(self):
        c = standard_log_point(1, 1)
        f = single_node(c, (0,), ())
        subs = list(enumerate_coordinate_subsheaves(f, proper=False))
        assert sorted(s.size for s in subs) == [0, 1]

    @pytest.mark.parametrize("k", [2, 3, 4])
    def test_identity_chain_gives_suffixes(self, k):
        f = point_pullback(k)
        subs = list(enumerate_coordinate_subsheaves(f, proper=False))
        assert len(subs) == k + 1
        for s in subs:
            assert is_closed(f, s)

    def test_non_simplicial_count(self):
        f = non_simplicial_pullback(5)
        subs = list(enumerate_coordinate_subsheaves(f))
        assert len(subs) == len(set(subs))
        assert all(is_closed(f, s) for s in subs)

    def test_closure_required(self):
        f = point_pullback(2)
        # the summand at weight 0 maps onto the one at 1/2, so it cannot stand alone
        top = f.class_index((0,))
        subsets = [set() for _ in f.reps]
        subsets[top] = {0}
        assert subsheaf_slope(f, CoordinateSubsheaf.of([{0}, {0}])) == slope(f)
        assert subsheaf_slope(f, CoordinateSubsheaf.of([{0} if c != top else set() for c in range(2)]))
        with pytest.raises(StabilityError):
            subsheaf_slope(f, CoordinateSubsheaf.of(subsets))


class TestVerdict:
    def test_line_bundles_are_stable(self):
        charts = [c for c in base_charts(1, 2) + base_charts(2, 2) if not c.zero_flags]
        assert len(charts) == 2
        for chart in charts:
            npic = chart.base.pic_rank
            assert verdict(trivial_parabolic(chart, [(1,) * npic])).status == "stable"

    def test_non_simplicial_unstable(self):
        for d in (3, 5, 10):
            v = verdict(non_simplicial_pullback(d))
            assert v.status == "unstable"
            assert v.witness_slope > v.slope
            assert v.witness_slope.coefficient(0) - 1 == d - F(5, 2)

    def test_slice_pullback_strictly_semistable(self):
        f = slice_point_sheaf(2, 2, 0, 1)
        assert verdict(f).status == "stable"
        up = pullback(f, ExtensionStep.levels(2, 2, 4))
        v = verdict(up)
        assert v.status == "strictly_semistable"
        assert v.witness_slope == v.slope

    def test_sum_of_different_slopes(self):
        c = p1(1)
        f = direct_sum(trivial_parabolic(c, [(0,)]), trivial_parabolic(c, [(3,)]))
        v = verdict(f)
        assert v.status == "unstable" and v.witness_slope == P(3, 1)

    def test_json_shape(self):
        doc = verdict(non_simplicial_pullback(5)).to_json()
        assert doc["status"] == "unstable"
        assert doc["slope"]["text"] == "m + 19/6"
        assert doc["lattice_flag"]

    def test_cut_agrees_with_brute_force(self):
        rng = random.Random(2024)
        checked = 0
        for r, n in [(1, 1), (1, 2), (1, 3), (2, 1), (2, 2)]:
            for chart in base_charts(r, n):
                for _ in range(4):
                    f = random_sheaf(chart, rng)
                    assert verdict(f).status == brute_force_verdict(f), f
                    checked += 1
        assert checked == 60

    def test_cut_agrees_with_brute_force_on_second_chart(self):
        g = chart_e_double_prime()
        rng = random.Random(4)
        c = chart_l_prime()
        for _ in range(6):
            f = random_sheaf(c, rng, 3)
            assert verdict(f, g).status == brute_force_verdict(f, g)


class TestHN:
    def test_semistable_is_one_step(self):
        f = trivial_parabolic(p1(2), [(1,)])
        steps = hn_filtration(f)
        assert len(steps) == 1 and steps[0].slope == slope(f)

    def test_first_step_is_the_witness(self):
        f = non_simplicial_pullback(5)
        steps = hn_filtration(f)
        assert steps[0].subsheaf == verdict(f).witness
        assert all(a.slope > b.slope for a, b in zip(steps, steps[1:]))

    def test_two_line_bundles(self):
        c = p1(1)
        f = direct_sum(trivial_parabolic(c, [(0,)]), trivial_parabolic(c, [(3,)]))
        steps = hn_filtration(f)
        assert [s.slope for s in steps] == [P(3, 1), P(0, 1)]
        assert steps[-1].subsheaf.size == 2

    def test_brute_force_first_step(self):
        # the first step has the largest slope among all coordinate subsheaves
        rng = random.Random(9)
        for chart in base_charts(1, 2):
            f = random_sheaf(chart, rng)
            best = max(subsheaf_slope(f, s) for s in enumerate_coordinate_subsheaves(f, proper=False) if s.size)
            assert hn_filtration(f)[0].slope == best


class TestJH:
    def test_stable_is_its_own_graded(self):
        f = trivial_parabolic(p1(2), [(0,)])
        assert is_isomorphic(jh_graded(f), f)
        assert is_polystable(f)

    def test_point_pullback(self):
        up = point_pullback(2)
        assert len(jh_factors(up)) == 2
        gr = jh_graded(up)
        assert is_isomorphic(gr, type(up)(up.chart, up.reps, up.summands, {}))
        assert is_polystable(gr) and not is_polystable(up)
        assert s_equivalent(up, gr)

    def test_s_equivalence_of_pullbacks(self):
        f = trivial_parabolic(p1(1), [(1,)])
        up = pullback(f, ExtensionStep.levels(1, 1, 3))
        assert s_equivalent(up, up)

    def test_unstable_rejected(self):
        with pytest.raises(StabilityError):
            jh_factors(non_simplicial_pullback(5))


class TestClassification:
    def test_generically_trivial(self):
        assert classify_nonstable_pullback(trivial_parabolic(p1(1), [(0,)]), 2) is None

    def test_slice_on_the_square(self):
        s = classify_nonstable_pullback(slice_point_sheaf(2, 2, 0, 1), 4)
        assert (s.direction, s.index) == (0, 1)
        assert s.inner.total_rank() == 1

    def test_level_one_point(self):
        o = trivial_parabolic(standard_log_point(1, 1), [()])
        s = classify_nonstable_pullback(o, 2)
        assert (s.direction, s.index) == (0, 1)
        assert is_isomorphic(embed_slice(s.inner, o.chart, 0, 1, 1), o)

    def test_needs_stable_input(self):
        with pytest.raises(StabilityError):
            classify_nonstable_pullback(point_pullback(2), 4)

    def test_line_on_quadric_stays_stable(self):
        f = shift(trivial_parabolic(chart_l_prime(), [(0, 0)]), (H, 0))
        assert classify_nonstable_pullback(f, 4) is None
