"""Free envelopes and Kummer quotients of a few small monoids."""

from parsheaf.exact import fmt
from parsheaf.monoid_lattice import (KummerExtension, MonoidPresentation, free_envelope, fundamental_weights,
                                     simplicial_structure, standard_relations)


def show(vs):
    return "[" + ", ".join("(" + ", ".join(fmt(x) for x in v) + ")" for v in vs) + "]"


for gens in [((2, 0), (1, 1), (0, 2)), ((1, 0), (1, 1), (1, 2)), ((2, 0, 0), (0, 2, 0), (0, 0, 2), (1, 1, 1))]:
    p = MonoidPresentation(len(gens[0]), gens)
    st = simplicial_structure(p)
    print(f"P = {show(p.generators)}")
    print(f"  extremal {show(st.extremal)}, internal {show(st.internal)}")
    for rel in standard_relations(p):
        print(f"  {rel.c} * {show([rel.q])[1:-1]} = combination {rel.coefficients} of the extremal ones")
    env = free_envelope(p)
    k = KummerExtension(p, env)
    print(f"  F(P) = {show(env.generators)}, invariant factors of Q/P {list(k.invariant_factors)}")
    print()

# the square root of <p, q, r | p + q = 2r>: eight fundamental weights in four classes
k = KummerExtension.root(MonoidPresentation(2, ((2, 0), (1, 1), (0, 2))), 2)
print("fundamental weights of the square root:")
for w in fundamental_weights(k):
    print("  ", show([w.vector])[1:-1], "a =", w.index)
