"""Moving sheaves up and down a tower of root levels."""

from parsheaf.base_chart import BaseGeometry, Chart, standard_log_point
from parsheaf.monoid_lattice import KummerExtension
from parsheaf.parabolic_core import direct_sum, is_isomorphic, shift, trivial_parabolic
from parsheaf.repro import e_t
from parsheaf.root_ops import (ExtensionStep, adjunction_defect, descends, pullback, pushforward,
                               twisted_pushforward, weighted_structure_sheaf)
from parsheaf.stability import slope

chart = Chart(KummerExtension.free(1, 2), BaseGeometry.p1(), [[1]], [])
f = shift(trivial_parabolic(chart, [(1,)]), ("1/2",))
step = ExtensionStep.levels(1, 2, 6)
up = pullback(f, step)
print("level 2 slope", slope(f), "| level 6 slope", slope(up))
print("pi_* pi^* f = f:", adjunction_defect(f, step))

# a level-6 sheaf whose jumps sit between the level-2 grid points
h = direct_sum(shift(trivial_parabolic(chart.at_level(6), [(1,)]), ("1/3",)),
               trivial_parabolic(chart.at_level(6), [(0,)]))
for d in range(3):
    g = twisted_pushforward(h, (d,), 2)
    print(f"twist {d}: pieces at -1, -1/2:", sorted(g.piece_at(("-1",))), sorted(g.piece_at(("-1/2",))))

o = trivial_parabolic(Chart(KummerExtension.free(1, 1), BaseGeometry.p1(), [[1]], []), [(0,)])
for d in range(4):
    w = weighted_structure_sheaf(chart.at_level(4), (d,))
    print(f"pushforward of L_4^({d}) is O:", is_isomorphic(pushforward(w, ExtensionStep.levels(1, 1, 4)), o))

# the family k -t-> k on the square root of the log point
s = ExtensionStep.levels(1, 1, 2)
o_pt = pullback(trivial_parabolic(standard_log_point(1, 1), [()]), s)
for t in (1, 2, 0):
    print(f"E_{t}: isomorphic to pi^* O {is_isomorphic(e_t(t), o_pt)}, descends {descends(e_t(t), s)}")
