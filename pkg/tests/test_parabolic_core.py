from fractions import Fraction as F

import pytest

from parsheaf.base_chart import BaseGeometry, Chart, standard_log_point
from parsheaf.monoid_lattice import KummerExtension
from parsheaf.parabolic_core import (FormalScalar, Mat, MYData, ParabolicSheaf, SheafError, check_injectivity,
                                     direct_sum, embed_slice, from_my_filtration, is_isomorphic, jumping_numbers,
                                     piece, restrict, shift, single_node, tensor_line, trivial_parabolic,
                                     validate_sheaf, zero_sheaf)
from parsheaf.repro import (both_identity_log_point, chart_l_prime, e_t, my_corpus, non_simplicial_pullback,
                            slice_point_sheaf)
from parsheaf.root_ops import ExtensionStep, pullback

H = F(1, 2)


def o_pulled_to_double_root():
    o = trivial_parabolic(standard_log_point(1, 1), [()])
    return pullback(o, ExtensionStep.levels(1, 1, 2))


def p1_chart(n=1):
    return Chart(KummerExtension.free(1, n), BaseGeometry.p1(), [[1]], [])


class TestScalarsAndMatrices:
    def test_section_evaluates_to_zero_on_flagged_direction(self):
        c = standard_log_point(1, 1)
        assert FormalScalar.section((1,)).evaluate(c).is_zero()
        assert not FormalScalar.unit(1, 3).evaluate(c).is_zero()

    def test_product_adds_exponents(self):
        a = FormalScalar.section((1, 0), 2)
        b = FormalScalar.section((0, 1), 3)
        assert (a * b) == FormalScalar.section((1, 1), 6)

    def test_identity_composes(self):
        i = Mat.identity(2, 1)
        s = Mat.identity(2, 1, section=(1,))
        assert i @ s == s

    def test_shape_mismatch(self):
        with pytest.raises(Exception):
            Mat.identity(2, 1) @ Mat.identity(3, 1)


class TestValidate:
    def test_pullback_of_structure_sheaf(self):
        assert validate_sheaf(o_pulled_to_double_root()) == []

    def test_identity_loop_breaks_periodicity(self):
        msgs = validate_sheaf(both_identity_log_point())
        assert msgs and all("loop" in m for m in msgs)

    def test_e_one(self):
        assert validate_sheaf(e_t(1)) == []

    def test_missing_class(self):
        f = e_t(1)
        g = ParabolicSheaf(f.chart, f.reps[:1], f.summands[:1], {})
        msgs = validate_sheaf(g)
        assert len(msgs) == 1 and "missing weight class" in msgs[0]

    def test_wrong_shape(self):
        f = e_t(1)
        trans = dict(f.transitions)
        trans[(0, 0)] = Mat(2, 1)
        msgs = validate_sheaf(ParabolicSheaf(f.chart, f.reps, f.summands, trans))
        assert any("expected 1x1" in m for m in msgs)

    def test_noncommuting_square(self):
        c = standard_log_point(2, 1)
        one = FormalScalar.unit(2)
        f = ParabolicSheaf(c, c.kummer.default_reps, [[(), ()]],
                           {(0, 0): Mat(2, 2, ((FormalScalar(), one), (FormalScalar(), FormalScalar()))),
                            (0, 1): Mat(2, 2, ((FormalScalar(), FormalScalar()), (one, FormalScalar())))})
        assert any("does not commute" in m for m in validate_sheaf(f))

    def test_non_simplicial_pullback_valid(self):
        assert validate_sheaf(non_simplicial_pullback(3)) == []


class TestPieces:
    def test_trivial_on_quadric(self):
        f = trivial_parabolic(chart_l_prime(), [(2, 0)])
        assert piece(f, (-1, -1)) == ((0, 0),)
        assert piece(f, (-H, -1)) == ((1, 0),)
        assert piece(f, (-H, -H)) == ((2, 0),)

    def test_rep_returns_stored(self):
        f = trivial_parabolic(chart_l_prime(), [(2, 0), (0, 1)])
        for c, v in enumerate(f.reps):
            assert piece(f, v) == tuple(f.summands[c])

    def test_non_simplicial_piece(self):
        d = 5
        f = non_simplicial_pullback(d)
        # L_p has degree 0 and L_r degree 1
        assert sorted(piece(f, (-1, 0))) == [(d - 1,), (d,)]

    def test_zero(self):
        z = zero_sheaf(chart_l_prime())
        assert z.is_zero() and validate_sheaf(z) == []


class TestMY:
    def test_trivial_filtration(self):
        c = p1_chart()
        d = MYData(c, (1,), ((0,), (2,)), (0,), ({0, 1},))
        assert is_isomorphic(from_my_filtration(d), trivial_parabolic(c, [(0,), (2,)]))

    def test_two_weights(self):
        d = MYData(p1_chart(), (1,), ((0,), (0,)), (0, H), ({0, 1}, {0}))
        f = from_my_filtration(d)
        assert validate_sheaf(f) == []
        assert sorted(piece(f, (-H,))) == [(-1,), (0,)]
        assert sorted(piece(f, (0,))) == [(0,), (0,)]
        assert jumping_numbers(f) == [0, H]

    def test_piece_at_weight_is_filtration_step(self):
        for d in my_corpus():
            f = from_my_filtration(d)
            for i, a in enumerate(d.weights):
                assert sorted(piece(f, (-a,))) == sorted(d.filtration_piece(i))
            assert check_injectivity(f)

    def test_filtration_must_decrease(self):
        with pytest.raises(SheafError):
            MYData(p1_chart(), (1,), ((0,), (0,)), (0, H), ({0, 1}, {0, 1, 2}))


class TestSlices:
    def test_single_slice(self):
        f = slice_point_sheaf(1, 2, 0, 1)
        assert validate_sheaf(f) == []
        assert [len(piece(f, (-H,))), len(piece(f, (0,)))] == [1, 0]

    def test_two_direction_slice_of_a_sheaf(self):
        outer = standard_log_point(2, 2)
        inner = o_pulled_to_double_root()
        f = embed_slice(inner, outer, 0, 1, 2)
        assert validate_sheaf(f) == []
        for b in (-1, -H, 0):
            assert len(piece(f, (-H, b))) == 1
            assert len(piece(f, (0, b))) == 0 and len(piece(f, (-1, b))) == 0
        # the inner maps survive along the other direction, the slice direction is zero
        _, m = f.path_matrix((-H, -1), [1])
        assert not m.is_zero() or not inner.path_matrix((-1,), [0])[1].is_zero()
        assert f.path_matrix((-H, -H), [0])[1].is_zero()

    def test_needs_vanishing_section(self):
        with pytest.raises(SheafError):
            embed_slice(single_node(standard_log_point(0, 2), (), ()), p1_chart(2), 0, 1, 2)


class TestOperations:
    def test_direct_sum_and_restrict(self):
        c = p1_chart(2)
        a = trivial_parabolic(c, [(0,)])
        b = trivial_parabolic(c, [(3,)])
        s = direct_sum(a, b)
        assert validate_sheaf(s) == []
        assert is_isomorphic(restrict(s, [[1]] * len(s.reps)), b)

    def test_tensor_line(self):
        c = p1_chart(2)
        assert is_isomorphic(tensor_line(trivial_parabolic(c, [(0,)]), (2,)), trivial_parabolic(c, [(2,)]))

    def test_shift_by_integer_is_twist(self):
        c = p1_chart(2)
        f = trivial_parabolic(c, [(0,)])
        assert is_isomorphic(shift(f, (1,)), trivial_parabolic(c, [(1,)]))

    def test_shift_valid(self):
        f = shift(trivial_parabolic(chart_l_prime(), [(1, 0)]), (H, 0))
        assert validate_sheaf(f) == []


class TestIsomorphism:
    def test_family(self):
        up = o_pulled_to_double_root()
        assert is_isomorphic(e_t(1), up)
        assert is_isomorphic(e_t(F(7, 3)), up)
        assert not is_isomorphic(e_t(0), up)

    def test_reflexive(self):
        f = non_simplicial_pullback(3)
        assert is_isomorphic(f, f)

    def test_different_charts(self):
        assert not is_isomorphic(e_t(1), trivial_parabolic(p1_chart(2), [(0,)]))


class TestInjectivity:
    def test_line_bundle(self):
        assert check_injectivity(trivial_parabolic(p1_chart(3), [(1,)]))

    def test_log_point_zero_step(self):
        assert not check_injectivity(o_pulled_to_double_root())
