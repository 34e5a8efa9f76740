"""Verdicts, filtrations and the classification of non-stable pullbacks."""

from parsheaf.base_chart import standard_log_point
from parsheaf.parabolic_core import trivial_parabolic
from parsheaf.repro import non_simplicial_pullback, slice_point_sheaf
from parsheaf.root_ops import ExtensionStep, pullback
from parsheaf.stability import (classify_nonstable_pullback, hn_filtration, jh_factors, jh_graded, s_equivalent,
                                slope, verdict)

for d in (3, 5, 10):
    f = non_simplicial_pullback(d)
    v = verdict(f)
    print(f"d={d}: slope {slope(f)}, {v.status}, best coordinate subsheaf {v.witness_slope}")

f = non_simplicial_pullback(5)
print("HN slopes of the d=5 pullback:", [str(s.slope) for s in hn_filtration(f)])

o = trivial_parabolic(standard_log_point(1, 1), [()])
up = pullback(o, ExtensionStep.levels(1, 1, 2))
print("\nlog point pulled to level 2:", verdict(up).status, "with", len(jh_factors(up)), "JH factors")
print("S-equivalent to its graded object:", s_equivalent(up, jh_graded(up)))

for s, m in [(o, 2), (slice_point_sheaf(2, 2, 0, 1), 4)]:
    c = classify_nonstable_pullback(s, m)
    print(f"r={s.chart.r}, rank {s.total_rank()}: slice in direction {c.direction}, index {c.index}")
