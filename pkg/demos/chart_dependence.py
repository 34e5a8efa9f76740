"""The same line bundles compared under two generating charts on P1 x P1."""

from parsheaf.parabolic_core import trivial_parabolic
from parsheaf.repro import chart_e_double_prime, chart_l_prime
from parsheaf.stability import mean_value, slope, weighted_mean

chart = chart_l_prime()
other = chart_e_double_prime()
for c in [(2, 0), (1, 1)]:
    f = trivial_parabolic(chart, [c])
    print(f"O{c}: standard chart {slope(f, None, 'monic')}, square cone chart {slope(f, other, 'monic')}")

# on the second chart the slope of O(2,0) splits into three pieces
f = trivial_parabolic(chart, [(2, 0)])
terms = weighted_mean(f, other, "monic", group="piece")
for t in terms:
    print(f"  piece {t.piece} x{t.count}: gamma {t.gamma}, slope {t.part}")
print("  weighted mean:", mean_value(terms))
