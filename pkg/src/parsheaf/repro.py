"""Worked examples as fixtures, plus self-checking reproduction targets."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable

from .base_chart import BaseGeometry, Chart, HilbertPoly
from .exact import fmt
from .monoid_lattice import KummerExtension, MonoidPresentation, free_envelope, is_free
from .parabolic_core import (FormalScalar, Mat, MYData, ParabolicSheaf, embed_slice, from_my_filtration,
                             is_isomorphic, my_euler, single_node, trivial_parabolic, validate_sheaf)
from .root_ops import ExtensionStep, descends, pullback, pushforward, weighted_structure_sheaf
from .stability import (GeneratingChart, classify_nonstable_pullback, jh_factors, jh_graded, modified_hilbert,
                        slope, verdict, weighted_mean)

# ---------------------------------------------------------------- fixtures


def chart_l_prime(level: int = 2) -> Chart:
    """N^2 in (1/n)N^2 over P1 x P1 with both directions sent to the class (1, 0)."""
    return Chart(KummerExtension.free(2, level), BaseGeometry.p1xp1(), [[1, 1], [0, 0]], [])


def square_cone() -> MonoidPresentation:
    return MonoidPresentation(3, ((1, 0, 0), (1, 1, 1), (1, 1, 0), (1, 0, 1)))


def chart_e_double_prime() -> GeneratingChart:
    """The cone over a square mapped onto N^2 by (x, y, z) -> (x - z, y)."""
    return GeneratingChart(KummerExtension.root(square_cone(), 2), ((1, 0, -1), (0, 1, 0)), "square")


def non_simplicial_monoid() -> MonoidPresentation:
    """<p, q, r | p + q = 2r> with p = (2, 0), r = (1, 1), q = (0, 2)."""
    return MonoidPresentation(2, ((2, 0), (1, 1), (0, 2)))


def non_simplicial_charts(genus: int = 0) -> tuple[Chart, Chart]:
    """Level 1 and the square-root level on a curve; deg L_p, L_q, L_r = 0, 2, 1; all sections zero."""
    p = non_simplicial_monoid()
    base = BaseGeometry.curve(genus, 1)
    c1 = Chart(KummerExtension(p, p), base, [[0, 1]], [0, 1, 2])
    return c1, c1.with_kummer(KummerExtension.root(p, 2))


def level_one_line(chart: Chart, c) -> ParabolicSheaf:
    """A line bundle as a parabolic sheaf with Q = P: every arrow is s^q."""
    q = chart.kummer.q_gens

    def matrix(v, i):
        return Mat.identity(1, chart.r, section=tuple(int(x) for x in q[i]))

    return ParabolicSheaf.build(chart, lambda v: [chart.base.check_class(c)], matrix)


def non_simplicial_pullback(d: int, genus: int = 0) -> ParabolicSheaf:
    c1, c2 = non_simplicial_charts(genus)
    return pullback(level_one_line(c1, (d,)), ExtensionStep(c1.kummer, c2.kummer))


def e_t(t) -> ParabolicSheaf:
    """The family on the square root of the standard log point: k -t-> k -0-> k."""
    from .base_chart import standard_log_point

    chart = standard_log_point(1, 2)
    reps = chart.kummer.default_reps
    f = ParabolicSheaf(chart, reps, [[()] for _ in reps])
    zero_c = f.class_index((0,))
    t = Fraction(t)
    top = FormalScalar.unit(1, t) if t else FormalScalar()
    trans = {(zero_c, 0): Mat(1, 1, ((top,),)), (1 - zero_c, 0): Mat(1, 1)}
    return ParabolicSheaf(chart, reps, [[()] for _ in reps], trans)


def my_corpus() -> list[MYData]:
    """Weighted filtrations of sums of line bundles on P1, D a point."""
    base = BaseGeometry.p1()
    c = Chart(KummerExtension.free(1, 1), base, [[1]], [])
    h = Fraction(1, 2)
    return [
        MYData(c, (1,), ((0,),), (0,), ({0},)),
        MYData(c, (1,), ((0,), (0,)), (0, h), ({0, 1}, {0})),
        MYData(c, (1,), ((2,), (-1,)), (Fraction(1, 3), Fraction(2, 3)), ({0, 1}, {1})),
        MYData(c, (1,), ((1,), (0,), (3,)), (0, Fraction(1, 4), Fraction(3, 4)), ({0, 1, 2}, {0, 2}, {2})),
        MYData(c, (1,), ((0,), (5,)), (Fraction(2, 5),), ({0, 1},)),
        MYData(c, (1,), ((-2,), (1,), (1,)), (Fraction(1, 6), Fraction(1, 2)), ({0, 1, 2}, {0})),
    ]


def both_identity_log_point() -> ParabolicSheaf:
    """k = k = k on the square root of the standard log point (violates periodicity)."""
    from .base_chart import standard_log_point

    chart = standard_log_point(1, 2)
    reps = chart.kummer.default_reps
    trans = {(c, 0): Mat.identity(1, 1) for c in range(len(reps))}
    return ParabolicSheaf(chart, reps, [[()] for _ in reps], trans)


def slice_point_sheaf(r: int, n: int, i: int, j: int) -> ParabolicSheaf:
    """I^i_{n,j}(k) on the level-n root of the standard log point of rank r."""
    from .base_chart import standard_log_point

    outer = standard_log_point(r, n)
    inner_chart = outer.drop_direction(i)
    inner = single_node(inner_chart, (Fraction(0),) * (r - 1), ())
    return embed_slice(inner, outer, i, j, n)


# ---------------------------------------------------------------- checks


@dataclass
class Check:
    name: str
    expected: Any
    actual: Any
    origin: str
    passed: bool = field(init=False)

    def __post_init__(self):
        self.passed = self.expected == self.actual

    def to_json(self) -> dict:
        return {"name": self.name, "expected": _js(self.expected), "actual": _js(self.actual),
                "origin": self.origin, "passed": self.passed}


def _js(x):
    if isinstance(x, Fraction):
        return fmt(x)
    if isinstance(x, HilbertPoly):
        return str(x)
    if isinstance(x, (list, tuple)):
        return [_js(y) for y in x]
    return x


def _poly(*coeffs) -> HilbertPoly:
    return HilbertPoly.of(*coeffs)


def dependence_chart(**_) -> list[Check]:
    c = chart_l_prime()
    g2 = chart_e_double_prime()
    a = trivial_parabolic(c, [(2, 0)])
    b = trivial_parabolic(c, [(1, 1)])
    h = Fraction(1, 2)
    out = [
        Check("slope O(2,0), chart l'", str(_poly(2, 3, 1)), str(slope(a, None, "monic")), "worked-example"),
        Check("slope O(1,1), chart l'", str(_poly(2, 3, 1)), str(slope(b, None, "monic")), "worked-example"),
        Check("slope O(2,0), chart l' o phi", str(_poly(h, Fraction(3, 2), 1)), str(slope(a, g2, "monic")),
              "worked-example"),
        Check("slope O(1,1), chart l' o phi", str(_poly(-1, Fraction(3, 2), 1)), str(slope(b, g2, "monic")),
              "worked-example"),
        Check("weighted-mean coefficients, chart l' o phi",
              [Fraction(5, 8), Fraction(1, 4), Fraction(1, 8)],
              [t.gamma for t in weighted_mean(a, g2, "monic", group="piece")], "derived"),
        Check("modified Hilbert polynomial O(2,0), chart l'", str(_poly(8, 12, 4)), str(modified_hilbert(a)),
              "derived"),
    ]
    return out


def non_simplicial(degree=(3, 5, 10), **_) -> list[Check]:
    degrees = [degree] if isinstance(degree, int) else list(degree)
    out = []
    for d in degrees:
        f = non_simplicial_pullback(d)
        p = modified_hilbert(f)
        mu = slope(f)
        v = verdict(f)
        # on a genus 0 curve with h = 1 the constant term carries 1 - g = 1 per summand
        off = mu.coefficient(0) - 1
        wit = v.witness_slope.coefficient(0) - 1 if v.witness_slope is not None else None
        out += [
            Check(f"d={d}: rank coefficient", 12, p.coefficient(1), "worked-example"),
            Check(f"d={d}: degree 12d-34", 12 * d - 34, p.coefficient(0) - 12, "worked-example"),
            Check(f"d={d}: slope offset d-17/6", d - Fraction(17, 6), off, "worked-example"),
            Check(f"d={d}: verdict", "unstable", v.status, "worked-example"),
            Check(f"d={d}: witness slope offset d-2", d - 2, wit, "worked-example"),
            Check(f"d={d}: maximal coordinate witness offset d-5/2", d - Fraction(5, 2), wit, "derived"),
        ]
    return out


def log_point_closure(**_) -> list[Check]:
    from .base_chart import standard_log_point

    o = trivial_parabolic(standard_log_point(1, 1), [()])
    step = ExtensionStep.levels(1, 1, 2)
    up = pullback(o, step)
    return [
        Check("pullback of O is valid", [], validate_sheaf(up), "worked-example"),
        Check("identity maps violate periodicity", True, bool(validate_sheaf(both_identity_log_point())), "trivial"),
        Check("E_1 is valid", [], validate_sheaf(e_t(1)), "worked-example"),
        Check("E_1 isomorphic to pullback of O", True, is_isomorphic(e_t(1), up), "worked-example"),
        Check("E_0 isomorphic to pullback of O", False, is_isomorphic(e_t(0), up), "worked-example"),
        Check("E_1 descends to level 1", True, descends(e_t(1), step), "worked-example"),
        Check("E_0 descends to level 1", False, descends(e_t(0), step), "worked-example"),
    ]


def my_comparison(**_) -> list[Check]:
    out = []
    for k, d in enumerate(my_corpus()):
        f = from_my_filtration(d)
        lhs = my_euler(d) * d.level
        out.append(Check(f"filtration {k}: n chi_MY = modified Hilbert", str(lhs), str(modified_hilbert(f)),
                         "worked-example"))
    return out


def stable_slice(**_) -> list[Check]:
    from .base_chart import standard_log_point

    o = trivial_parabolic(standard_log_point(1, 1), [()])
    up = pullback(o, ExtensionStep.levels(1, 1, 2))
    v = verdict(up)
    factors = jh_factors(up)
    lp2 = standard_log_point(1, 2)
    closed = [single_node(lp2, (Fraction(-1, 2),), ()), single_node(lp2, (Fraction(0),), ())]
    gr = jh_graded(up)
    direct = ParabolicSheaf(lp2, gr.reps, gr.summands, {})
    return [
        Check("level-1 point is stable", "stable", verdict(o).status, "worked-example"),
        Check("pullback verdict", "strictly_semistable", v.status, "worked-example"),
        Check("witness slope equals slope", str(v.slope), str(v.witness_slope), "worked-example"),
        Check("number of JH factors", 2, len(factors), "worked-example"),
        Check("graded object has zero maps", True, is_isomorphic(gr, direct), "worked-example"),
        Check("graded object is the sum of the two slices", True,
              is_isomorphic(gr, _sum(closed)), "derived"),
    ]


def _sum(fs: list[ParabolicSheaf]) -> ParabolicSheaf:
    from .parabolic_core import direct_sum

    out = fs[0]
    for f in fs[1:]:
        out = direct_sum(out, f)
    return out


def pullback_classification(**_) -> list[Check]:
    from .base_chart import standard_log_point

    o = trivial_parabolic(standard_log_point(1, 1), [()])
    r1 = classify_nonstable_pullback(o, 2)
    p1 = Chart(KummerExtension.free(1, 1), BaseGeometry.p1(), [[1]], [])
    line = trivial_parabolic(p1, [(0,)])
    s = slice_point_sheaf(2, 2, 0, 1)
    r2 = classify_nonstable_pullback(s, 4)
    return [
        Check("line bundle with nonzero section", None, classify_nonstable_pullback(line, 2), "worked-example"),
        Check("level-1 point: direction and slice", (0, 1), (r1.direction, r1.index), "worked-example"),
        Check("level-1 point: inner sheaf rank", 1, r1.inner.total_rank(), "worked-example"),
        Check("I^0_{2,1}(k) on the square: direction and slice", (0, 1), (r2.direction, r2.index), "derived"),
    ]


def envelope_examples(**_) -> list[Check]:
    def gens(p):
        return [tuple(fmt(x) for x in g) for g in p.generators]

    non = non_simplicial_monoid()
    env = free_envelope(non)
    nat = MonoidPresentation.free(3, 1)
    other = MonoidPresentation(2, ((1, 0), (1, 1), (1, 2)))
    return [
        Check("F(<p,q,r | p+q=2r>)", [("1", "0"), ("0", "1")], gens(env), "worked-example"),
        Check("F(<p,q,r | p+q=2r>) is free", True, is_free(env), "worked-example"),
        Check("F(N^3) = N^3", gens(nat), gens(free_envelope(nat)), "trivial"),
        Check("F(<(1,0),(1,1),(1,2)>)", [("1/2", "1"), ("1/2", "0")], gens(free_envelope(other)), "derived"),
        Check("F is idempotent", gens(env), gens(free_envelope(env)), "derived"),
    ]


def pushforward_unit(**_) -> list[Check]:
    import itertools

    out = []
    for r in (1, 2):
        base_chart = Chart(KummerExtension.free(r, 1), BaseGeometry.p1xp1() if r == 2 else BaseGeometry.p1(),
                           [[1, 0], [0, 1]] if r == 2 else [[1]], [])
        o = trivial_parabolic(base_chart, [(0,) * r])
        bad = []
        for n in range(1, 7):
            c = base_chart.at_level(n)
            step = ExtensionStep.levels(r, 1, n)
            for d in itertools.product(range(n), repeat=r):
                if not is_isomorphic(pushforward(weighted_structure_sheaf(c, d), step), o):
                    bad.append((n, d))
        out.append(Check(f"rank {r}: pushforward of L_n^(d) is O", [], bad, "worked-example"))
    return out


def fixture_documents() -> dict[str, dict]:
    """One problem document per reproduction target."""
    from . import docio
    from .base_chart import standard_log_point

    c1, _ = non_simplicial_charts()
    env_ext = KummerExtension(non_simplicial_monoid(), free_envelope(non_simplicial_monoid()))
    p1 = Chart(KummerExtension.free(1, 2), BaseGeometry.p1(), [[1]], [])
    o = trivial_parabolic(standard_log_point(1, 1), [()])
    return {
        "dependence_chart": docio.document(trivial_parabolic(chart_l_prime(), [(2, 0)]),
                                           generating=[chart_e_double_prime()], origin="worked-example",
                                           description="trivial structure on O(2,0) over P1 x P1, two charts"),
        "non_simplicial": docio.document(non_simplicial_pullback(5), origin="worked-example",
                                         description="pullback of a degree 5 line bundle to the square root"),
        "log_point_closure": docio.document(e_t(1), origin="worked-example",
                                            description="the family member t = 1 on the standard log point"),
        "my_comparison": docio.document(from_my_filtration(my_corpus()[1]), origin="worked-example",
                                        description="O + O on P1 with weights 0 and 1/2"),
        "stable_slice": docio.document(pullback(o, ExtensionStep.levels(1, 1, 2)), origin="worked-example",
                                       description="pullback of the level-1 point to level 2"),
        "pullback_classification": docio.document(slice_point_sheaf(2, 2, 0, 1), origin="derived",
                                                  description="a slice sheaf on the square of the log point"),
        "envelope_examples": docio.document(chart=Chart(env_ext, BaseGeometry.log_point(), [], []),
                                            origin="worked-example",
                                            description="<p,q,r | p+q=2r> inside its free envelope"),
        "pushforward_unit": docio.document(weighted_structure_sheaf(p1, (1,)), origin="worked-example",
                                           description="the weight 1/2 shift of the structure sheaf"),
    }


TARGETS: dict[str, Callable[..., list[Check]]] = {
    "dependence_chart": dependence_chart,
    "non_simplicial": non_simplicial,
    "log_point_closure": log_point_closure,
    "my_comparison": my_comparison,
    "stable_slice": stable_slice,
    "pullback_classification": pullback_classification,
    "envelope_examples": envelope_examples,
    "pushforward_unit": pushforward_unit,
}


def run_target(name: str, **params) -> list[Check]:
    if name not in TARGETS:
        raise KeyError(name)
    return TARGETS[name](**params)
