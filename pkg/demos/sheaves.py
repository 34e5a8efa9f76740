"""Building parabolic sheaves: weighted filtrations, slices and validation."""

from fractions import Fraction

from parsheaf.base_chart import standard_log_point
from parsheaf.parabolic_core import (embed_slice, from_my_filtration, jumping_numbers, my_euler, single_node,
                                     validate_sheaf)
from parsheaf.repro import both_identity_log_point, my_corpus
from parsheaf.stability import modified_hilbert

d = my_corpus()[3]
f = from_my_filtration(d)
print("filtration with weights", [str(w) for w in d.weights])
print("  jumping numbers", [str(x) for x in jumping_numbers(f)])
for a in range(-d.level, 1):
    w = (Fraction(a, d.level),)
    print(f"  piece at {w[0]}: {f.piece_at(w)}")
print("  n chi_MY      ", my_euler(d) * d.level)
print("  modified Hilb ", modified_hilbert(f))

# a one-dimensional slice placed in direction 0 of the square of the log point
outer = standard_log_point(2, 2)
inner = single_node(outer.drop_direction(0), (Fraction(0),), ())
s = embed_slice(inner, outer, 0, 1, 2)
print("\nslice sheaf nodes:", [(tuple(str(x) for x in v), len(ss)) for v, ss in zip(s.reps, s.summands) if ss])
print("valid:", validate_sheaf(s) == [])

print("\nidentity maps on the square root of the log point:")
for msg in validate_sheaf(both_identity_log_point()):
    print("  ", msg)
