from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from parsheaf.base_chart import (BaseGeometry, Chart, ChartError, HilbertPoly, euler_poly, euler_sum, poly_compare,
                                 reduce_poly, standard_log_point)
from parsheaf.monoid_lattice import KummerExtension, MonoidPresentation

P = HilbertPoly.of
fracs = st.fractions(min_value=-20, max_value=20, max_denominator=12)
polys = st.lists(fracs, max_size=4).map(lambda cs: HilbertPoly(tuple(cs)))


class TestEuler:
    def test_quadric_surface(self):
        assert euler_poly(BaseGeometry.p1xp1(), (2, 0)) == P(3, 4, 1)

    def test_log_point(self):
        assert euler_poly(BaseGeometry.log_point(), ()) == P(1)

    def test_rational_curve_matches_p1(self):
        for a in range(-3, 4):
            assert euler_poly(BaseGeometry.curve(0, 1), (a,)) == euler_poly(BaseGeometry.p1(), (a,)) == P(a + 1, 1)

    def test_curve_with_genus(self):
        assert euler_poly(BaseGeometry.curve(2, 3), (5,)) == P(4, 3)

    def test_sum(self):
        assert euler_sum(BaseGeometry.p1(), [(0,), (1,), (-1,)]) == P(3, 3)

    def test_bad_class(self):
        with pytest.raises(ValueError):
            euler_poly(BaseGeometry.p1xp1(), (1,))


class TestCompare:
    def test_slopes_from_two_charts(self):
        assert poly_compare(P(2, 3, 1), P(F(1, 2), F(3, 2), 1)) == 1

    def test_equal(self):
        assert poly_compare(P(1, 2), P(1, 2)) == 0

    def test_degree_dominates(self):
        assert poly_compare(P(5, 1), P(-100, 0, 1)) == -1
        assert P(5, 1) < P(-100, 0, 1)

    @given(polys, polys)
    @settings(max_examples=80, deadline=None)
    def test_antisymmetric(self, p, q):
        assert poly_compare(p, q) == -poly_compare(q, p)
        assert (poly_compare(p, q) == 0) == (p == q)

    @given(polys, polys)
    @settings(max_examples=80, deadline=None)
    def test_matches_large_m(self, p, q):
        # the order is the order of values for m large enough
        c = poly_compare(p, q)
        big = 10**6
        d = p(big) - q(big)
        assert c == (d > 0) - (d < 0)


class TestReduce:
    def test_linear(self):
        assert reduce_poly(P(4, 2)) == P(2, 1)

    def test_non_simplicial_slope_at_five(self):
        assert reduce_poly(P(26, 12)) == P(F(13, 6), 1)

    def test_surface_factorial(self):
        assert reduce_poly(P(3, 4, 1)) == P(F(3, 2), 2, F(1, 2))

    def test_surface_monic(self):
        assert reduce_poly(P(3, 4, 1) * 4, "monic") == P(3, 4, 1)

    def test_zero_rejected(self):
        with pytest.raises(ValueError):
            reduce_poly(P())

    def test_unknown_normalization(self):
        with pytest.raises(ValueError):
            reduce_poly(P(1), "other")


class TestPolyArithmetic:
    def test_shift(self):
        assert P(0, 0, 1).shift(1) == P(1, 2, 1)

    def test_str(self):
        assert str(P(2, 3, 1)) == "m^2 + 3 m + 2"
        assert str(P(-1, F(3, 2), 1)) == "m^2 + 3/2 m - 1"
        assert str(P()) == "0"

    def test_json_round_trip(self):
        p = P(F(1, 2), F(-3, 2), 1)
        doc = p.to_json()
        assert doc["text"] == str(p)
        assert HilbertPoly.from_json(doc) == p

    @given(polys, polys, st.integers(-5, 5))
    @settings(max_examples=50, deadline=None)
    def test_eval_is_ring_map(self, p, q, m):
        assert (p + q)(m) == p(m) + q(m)
        assert (p * q)(m) == p(m) * q(m)


class TestChart:
    def test_pic(self):
        c = Chart(KummerExtension.free(2, 2), BaseGeometry.p1xp1(), [[1, 1], [0, 0]], [])
        assert c.pic((1, 0)) == (1, 0)
        assert c.pic((-1, -1)) == (-2, 0)
        with pytest.raises(ChartError):
            c.pic((F(1, 2), 0))

    def test_shape_checked(self):
        with pytest.raises(ChartError):
            Chart(KummerExtension.free(2, 1), BaseGeometry.p1(), [[1, 0], [0, 1]], [])

    def test_zero_flags_must_respect_relations(self):
        p = MonoidPresentation(2, ((2, 0), (1, 1), (0, 2)))
        k = KummerExtension(p, p)
        # r is flagged but neither p nor q is; the relation p + q = 2r breaks closure
        with pytest.raises(ChartError, match="relation"):
            Chart(k, BaseGeometry.curve(), [[0, 1]], [1])
        assert Chart(k, BaseGeometry.curve(), [[0, 1]], [0, 1, 2]).section_is_zero((2, 2))

    def test_sections(self):
        c = standard_log_point(2, 1)
        assert c.section_is_zero((1, 0))
        assert not c.section_is_zero((0, 0))

    def test_drop_direction(self):
        c = Chart(KummerExtension.free(2, 3), BaseGeometry.p1xp1(), [[1, 0], [0, 1]], [1])
        d = c.drop_direction(0)
        assert d.r == 1 and d.kummer.level == 3
        assert d.pic_map == ((0,), (1,)) and d.zero_flags == {0}

    def test_at_level(self):
        c = standard_log_point(1, 1).at_level(4)
        assert c.kummer.level == 4 and c == standard_log_point(1, 4)
