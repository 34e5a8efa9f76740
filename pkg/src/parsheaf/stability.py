"""Slopes from generating charts and (semi)stability over coordinate subsheaves.

A coordinate subsheaf selects summands per class, closed under the nonzero
entries of the evaluated transition matrices. Its modified Hilbert
polynomial is a sum of per-summand contributions, so the existence of a
destabilizing subsheaf is a maximum-weight closure problem on the graph of
summands, solved exactly by a minimum cut.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Iterator, Sequence

import networkx as nx

from .base_chart import HilbertPoly, euler_poly, multiplicity, pic_add, poly_compare, reduce_poly
from .exact import Vec, mat_vec, vec
from .monoid_lattice import KummerExtension
from .parabolic_core import FormalScalar, Mat, ParabolicSheaf, embed_slice, is_isomorphic, restrict

LATTICE_FLAG = "coordinate-lattice verdict"


class StabilityError(ValueError):
    pass


# ---------------------------------------------------------------- generating charts

@dataclass(frozen=True)
class GeneratingChart:
    """Fundamental weights of source, carried into the sheaf's weights by transfer."""

    source: KummerExtension
    transfer: tuple[tuple[Fraction, ...], ...] | None = None
    name: str = "standard"

    def __post_init__(self):
        if self.transfer is not None:
            object.__setattr__(self, "transfer", tuple(vec(row) for row in self.transfer))
            if any(len(row) != self.source.r for row in self.transfer):
                raise StabilityError("transfer matrix columns must match the source rank")

    @classmethod
    def standard(cls, k: KummerExtension) -> "GeneratingChart":
        return cls(k)

    def map(self, v: Vec) -> Vec:
        return v if self.transfer is None else mat_vec(self.transfer, v)

    def weights(self) -> list[Vec]:
        return [self.map(w.vector) for w in self.source.fundamental_weights()]

    def check(self, k: KummerExtension) -> None:
        out_rank = self.source.r if self.transfer is None else len(self.transfer)
        if out_rank != k.r:
            raise StabilityError("generating chart lands in a lattice of the wrong rank")
        for w in self.weights():
            if not k.in_qgp(w):
                raise StabilityError(f"transferred weight {tuple(map(str, w))} is outside Q^gp")


def _chart(f: ParabolicSheaf, g: GeneratingChart | None) -> GeneratingChart:
    g = g or GeneratingChart.standard(f.kummer)
    g.check(f.kummer)
    return g


def modified_hilbert(f: ParabolicSheaf, g: GeneratingChart | None = None) -> HilbertPoly:
    """Sum of Hilbert polynomials of the pieces at the fundamental weights."""
    g = _chart(f, g)
    total = HilbertPoly()
    for w in g.weights():
        for c in f.piece_at(w):
            total = total + euler_poly(f.chart.base, c)
    return total


def slope(f: ParabolicSheaf, g: GeneratingChart | None = None, normalization: str = "factorial") -> HilbertPoly:
    p = modified_hilbert(f, g)
    if p.is_zero():
        raise StabilityError("zero sheaf has no slope")
    return reduce_poly(p, normalization)


@dataclass(frozen=True)
class MeanTerm:
    piece: tuple
    count: int
    gamma: Fraction
    part: HilbertPoly


def weighted_mean(f: ParabolicSheaf, g: GeneratingChart | None = None,
                  normalization: str = "factorial", group: str = "weight") -> list[MeanTerm]:
    """The slope as a convex combination of the slopes of the nonzero
    fundamental pieces.

    With group="weight" there is one term per fundamental weight (with
    multiplicity); group="piece" merges weights whose pieces coincide.
    """
    if group not in ("weight", "piece"):
        raise ValueError("group must be 'weight' or 'piece'")
    g = _chart(f, g)
    d = f.chart.base.dimension
    keys: list = []
    counts: dict = {}
    polys: dict = {}
    for n, w in enumerate(g.weights()):
        pc = tuple(sorted(f.piece_at(w)))
        p = HilbertPoly()
        for c in pc:
            p = p + euler_poly(f.chart.base, c)
        if p.is_zero():
            continue
        if p.degree != d:
            raise StabilityError("pieces of mixed dimension; the sheaf is not pure")
        key = pc if group == "piece" else n
        if key not in polys:
            keys.append(key)
            polys[key] = (pc, p)
            counts[key] = 0
        counts[key] += 1
    if not keys:
        raise StabilityError("zero sheaf has no slope")
    total = sum((multiplicity(polys[k][1], d) * counts[k] for k in keys), Fraction(0))
    return [MeanTerm(polys[k][0], counts[k], multiplicity(polys[k][1], d) * counts[k] / total,
                     reduce_poly(polys[k][1], normalization)) for k in keys]


def mean_value(terms: Sequence[MeanTerm]) -> HilbertPoly:
    out = HilbertPoly()
    for t in terms:
        out = out + t.part * t.gamma
    return out


# ---------------------------------------------------------------- coordinate subsheaves

@dataclass(frozen=True)
class CoordinateSubsheaf:
    subsets: tuple[frozenset[int], ...]

    @classmethod
    def of(cls, subsets: Sequence[Sequence[int]]) -> "CoordinateSubsheaf":
        return cls(tuple(frozenset(s) for s in subsets))

    @property
    def size(self) -> int:
        return sum(len(s) for s in self.subsets)

    def nodes(self) -> set[tuple[int, int]]:
        return {(c, j) for c, s in enumerate(self.subsets) for j in s}

    def to_json(self) -> list[list[int]]:
        return [sorted(s) for s in self.subsets]


class _Graph:
    """Summand nodes (class, index) with closure arrows from nonzero entries."""

    def __init__(self, f: ParabolicSheaf, g: GeneratingChart | None, normalization: str = "factorial"):
        self.f = f
        self.g = _chart(f, g)
        self.normalization = normalization
        self.d = f.chart.base.dimension
        self.nodes = [(c, j) for c in range(len(f.reps)) for j in range(f.rank_of(c))]
        self.pos = {x: i for i, x in enumerate(self.nodes)}
        self.succ: list[set[int]] = [set() for _ in self.nodes]
        for c in range(len(f.reps)):
            for i in range(len(f.q_gens)):
                tc, _ = f.target(c, i)
                for a, b in f.matrix(c, i).nonzero():
                    self.succ[self.pos[(c, b)]].add(self.pos[(tc, a)])
        self.pred: list[set[int]] = [set() for _ in self.nodes]
        for x, ys in enumerate(self.succ):
            for y in ys:
                self.pred[y].add(x)
        contrib = [HilbertPoly() for _ in self.nodes]
        for w in self.g.weights():
            c, t = f.twist_of(w)
            tw = f.chart.pic(t)
            for j, s in enumerate(f.summands[c]):
                x = self.pos[(c, j)]
                contrib[x] = contrib[x] + euler_poly(f.chart.base, pic_add(s, tw))
        self.poly = contrib
        self.alpha = [multiplicity(p, self.d) if not p.is_zero() else Fraction(0) for p in contrib]

    def subsheaf(self, xs) -> CoordinateSubsheaf:
        sets = [set() for _ in self.f.reps]
        for x in xs:
            c, j = self.nodes[x]
            sets[c].add(j)
        return CoordinateSubsheaf(tuple(frozenset(s) for s in sets))

    def indices(self, sub: CoordinateSubsheaf) -> set[int]:
        return {self.pos[x] for x in sub.nodes()}

    def is_closed(self, xs: set[int]) -> bool:
        return all(self.succ[x] <= xs for x in xs)

    def reach(self, x: int) -> set[int]:
        seen, stack = {x}, [x]
        while stack:
            for y in self.succ[stack.pop()]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return seen

    def poly_of(self, xs) -> HilbertPoly:
        out = HilbertPoly()
        for x in xs:
            out = out + self.poly[x]
        return out

    def slope_of(self, xs) -> HilbertPoly | None:
        p = self.poly_of(xs)
        return None if p.is_zero() else reduce_poly(p, self.normalization)

    def _alpha_of(self, lam: HilbertPoly) -> Fraction:
        """The factor turning alpha_x into the leading-term scale of lam."""
        lead = lam.coefficient(self.d)
        # lam has leading coefficient 1/d! or 1; P_x - a_x * lam must cancel the top term
        from math import factorial

        return Fraction(1, factorial(self.d)) / lead

    def weights(self, lam: HilbertPoly) -> list[HilbertPoly]:
        scale = self._alpha_of(lam)
        return [self.poly[x] - lam * (self.alpha[x] * scale) for x in range(len(self.nodes))]

    def max_closure(self, lam: HilbertPoly, forced: int | None = None):
        """Maximum of sum w_x over closed sets for w = P_x - alpha_x lam, compared
        lexicographically by coefficients; returns (value, minimal, maximal)."""
        ws = self.weights(lam)
        nd = self.d + 1
        den = lcm(*(w.coefficient(k).denominator for w in ws for k in range(nd)), 1)
        ints = [[int(w.coefficient(k) * den) for k in range(nd)] for w in ws]
        bound = sum(abs(v) for row in ints for v in row)
        base = 2 * bound + 1
        flat = [sum(v * base**k for k, v in enumerate(row)) for row in ints]
        return _closure(len(self.nodes), self.succ, flat, forced, ints)


def _closure(n: int, succ: Sequence[set[int]], w: Sequence[int], forced: int | None, coeffs):
    s, t = "s", "t"
    G = nx.DiGraph()
    G.add_nodes_from([s, t])
    G.add_nodes_from(range(n))
    for x in range(n):
        if forced == x:
            G.add_edge(s, x)
        elif w[x] > 0:
            G.add_edge(s, x, capacity=w[x])
        if w[x] < 0:
            G.add_edge(x, t, capacity=-w[x])
        for y in succ[x]:
            G.add_edge(x, y)
    R = nx.algorithms.flow.edmonds_karp(G, s, t)

    def live(u, v):
        return R[u][v]["capacity"] - R[u][v]["flow"] > 0

    fwd, stack = {s}, [s]
    while stack:
        u = stack.pop()
        for v in R.successors(u):
            if v not in fwd and live(u, v):
                fwd.add(v)
                stack.append(v)
    back, stack = {t}, [t]
    while stack:
        v = stack.pop()
        for u in R.predecessors(v):
            if u not in back and live(u, v):
                back.add(u)
                stack.append(u)
    minimal = {x for x in fwd if x != s}
    maximal = {x for x in range(n) if x not in back}
    value = [sum(coeffs[x][k] for x in minimal) for k in range(len(coeffs[0]))] if coeffs else []
    return _lex_sign(value), minimal, maximal


def _lex_sign(coeffs: list[int]) -> int:
    for v in reversed(coeffs):
        if v:
            return 1 if v > 0 else -1
    return 0


def enumerate_coordinate_subsheaves(f: ParabolicSheaf, proper: bool = True,
                                    cap: int = 8) -> Iterator[CoordinateSubsheaf]:
    """All closed summand selections, in a fixed order; empty and full are
    skipped when proper is set."""
    if any(f.rank_of(c) > cap for c in range(len(f.reps))):
        raise StabilityError(f"summand count above the cap {cap}")
    gr = _Graph(f, None)
    n = len(gr.nodes)

    def up(x):
        return gr.reach(x)

    def down(x):
        seen, stack = {x}, [x]
        while stack:
            for y in gr.pred[stack.pop()]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return seen

    def rec(i: int, inc: frozenset, exc: frozenset):
        while i < n and (i in inc or i in exc):
            i += 1
        if i == n:
            yield inc
            return
        if not (up(i) & exc):
            yield from rec(i + 1, inc | up(i), exc)
        if not (down(i) & inc):
            yield from rec(i + 1, inc, exc | down(i))

    for s in rec(0, frozenset(), frozenset()):
        if proper and (not s or len(s) == n):
            continue
        yield gr.subsheaf(s)


def is_closed(f: ParabolicSheaf, sub: CoordinateSubsheaf) -> bool:
    gr = _Graph(f, None)
    return gr.is_closed(gr.indices(sub))


# ---------------------------------------------------------------- verdicts

@dataclass(frozen=True)
class Verdict:
    status: str
    slope: HilbertPoly
    witness: CoordinateSubsheaf | None = None
    witness_slope: HilbertPoly | None = None
    lattice_flag: str = LATTICE_FLAG

    @property
    def semistable(self) -> bool:
        return self.status != "unstable"

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "slope": self.slope.to_json(),
            "witness": None if self.witness is None else self.witness.to_json(),
            "witness_slope": None if self.witness_slope is None else self.witness_slope.to_json(),
            "lattice_flag": self.lattice_flag,
        }


def _max_slope(gr: _Graph) -> tuple[HilbertPoly, set[int]]:
    """Maximal slope among closed sets and the largest set attaining it (Dinkelbach)."""
    allx = set(range(len(gr.nodes)))
    lam = gr.slope_of(allx)
    if lam is None:
        raise StabilityError("zero sheaf has no slope")
    while True:
        sign, minimal, _ = gr.max_closure(lam)
        if sign <= 0:
            break
        new = gr.slope_of(minimal)
        if new is None or poly_compare(new, lam) <= 0:
            break
        lam = new
    _, _, maximal = gr.max_closure(lam)
    return lam, maximal


def _equal_slope_proper(gr: _Graph, lam: HilbertPoly) -> set[int] | None:
    """Smallest proper closed set of slope lam (with positive rank) when the maximum is lam."""
    n = len(gr.nodes)
    ws = gr.weights(lam)
    best = None
    for x in range(n):
        if gr.alpha[x] == 0:
            continue
        r = gr.reach(x)
        tot = HilbertPoly()
        for y in r:
            tot = tot + ws[y]
        if tot.is_zero():
            cand = r
        else:
            sign, minimal, _ = gr.max_closure(lam, forced=x)
            if sign != 0:
                continue
            cand = minimal
        if len(cand) < n and (best is None or len(cand) < len(best)):
            best = cand
    return best


def verdict(f: ParabolicSheaf, g: GeneratingChart | None = None, normalization: str = "factorial") -> Verdict:
    gr = _Graph(f, g, normalization)
    allx = set(range(len(gr.nodes)))
    mu = gr.slope_of(allx)
    if mu is None:
        raise StabilityError("zero sheaf has no slope")
    top, witness = _max_slope(gr)
    if poly_compare(top, mu) > 0:
        return Verdict("unstable", mu, gr.subsheaf(witness), top)
    eq = _equal_slope_proper(gr, mu)
    if eq is not None:
        return Verdict("strictly_semistable", mu, gr.subsheaf(eq), gr.slope_of(eq))
    return Verdict("stable", mu)


def semistability(f: ParabolicSheaf, g: GeneratingChart | None = None, normalization: str = "factorial") -> Verdict:
    return verdict(f, g, normalization)


def stability(f: ParabolicSheaf, g: GeneratingChart | None = None, normalization: str = "factorial") -> Verdict:
    return verdict(f, g, normalization)


def subsheaf_slope(f: ParabolicSheaf, sub: CoordinateSubsheaf, g: GeneratingChart | None = None,
                   normalization: str = "factorial") -> HilbertPoly | None:
    gr = _Graph(f, g, normalization)
    xs = gr.indices(sub)
    if not gr.is_closed(xs):
        raise StabilityError("selection is not closed under the transition maps")
    return gr.slope_of(xs)


def brute_force_verdict(f: ParabolicSheaf, g: GeneratingChart | None = None, cap: int = 8) -> str:
    """Status by listing every coordinate subsheaf; used to cross-check the cut method."""
    gr = _Graph(f, g)
    mu = gr.slope_of(set(range(len(gr.nodes))))
    status = "stable"
    for sub in enumerate_coordinate_subsheaves(f, cap=cap):
        s = gr.slope_of(gr.indices(sub))
        if s is None:
            continue
        cmp = poly_compare(s, mu)
        if cmp > 0:
            return "unstable"
        if cmp == 0:
            status = "strictly_semistable"
    return status


# ---------------------------------------------------------------- filtrations

def _masked(f: ParabolicSheaf, groups: Sequence[set[tuple[int, int]]]) -> ParabolicSheaf:
    """Direct sum of the subquotients on the given node groups."""
    label = {x: k for k, grp in enumerate(groups) for x in grp}
    trans = {}
    for c in range(len(f.reps)):
        for i in range(len(f.q_gens)):
            tc, _ = f.target(c, i)
            m = f.matrix(c, i)
            rows = tuple(tuple(m[a, b] if label.get((tc, a)) == label.get((c, b)) else type(m[a, b])()
                               for b in range(m.ncols)) for a in range(m.nrows))
            trans[(c, i)] = Mat(m.nrows, m.ncols, rows)
    return ParabolicSheaf(f.chart, f.reps, f.summands, trans)


def _restrict_nodes(f: ParabolicSheaf, nodes: set[tuple[int, int]]) -> tuple[ParabolicSheaf, list[tuple[int, int]]]:
    keep = [sorted(j for (c, j) in nodes if c == cc) for cc in range(len(f.reps))]
    back = [(c, j) for c in range(len(f.reps)) for j in keep[c]]
    return restrict(f, keep), back


@dataclass(frozen=True)
class HNStep:
    subsheaf: CoordinateSubsheaf
    slope: HilbertPoly


def hn_filtration(f: ParabolicSheaf, g: GeneratingChart | None = None, normalization: str = "factorial") -> list[HNStep]:
    """Cumulative subsheaves 0 < E_1 < ... < E_k = f with strictly decreasing
    slopes of the successive quotients."""
    if f.is_zero():
        raise StabilityError("zero sheaf has no filtration")
    g = _chart(f, g)
    remaining = {(c, j) for c in range(len(f.reps)) for j in range(f.rank_of(c))}
    taken: set[tuple[int, int]] = set()
    steps: list[HNStep] = []
    while remaining:
        q, back = _restrict_nodes(f, remaining)
        gr = _Graph(q, g, normalization)
        if gr.slope_of(set(range(len(gr.nodes)))) is None:
            taken |= remaining
            remaining = set()
            if steps:
                steps[-1] = HNStep(_as_sub(f, taken), steps[-1].slope)
            break
        top, best = _max_slope(gr)
        chosen = {back[x] for x in best}
        taken |= chosen
        remaining -= chosen
        steps.append(HNStep(_as_sub(f, taken), top))
    return steps


def _as_sub(f: ParabolicSheaf, nodes: set[tuple[int, int]]) -> CoordinateSubsheaf:
    return CoordinateSubsheaf(tuple(frozenset(j for (c, j) in nodes if c == cc) for cc in range(len(f.reps))))


def jh_factors(f: ParabolicSheaf, g: GeneratingChart | None = None) -> list[set[tuple[int, int]]]:
    g = _chart(f, g)
    v = verdict(f, g)
    if v.status == "unstable":
        raise StabilityError("Jordan-Hoelder filtrations need a semistable sheaf")
    remaining = {(c, j) for c in range(len(f.reps)) for j in range(f.rank_of(c))}
    factors = []
    while remaining:
        q, back = _restrict_nodes(f, remaining)
        gr = _Graph(q, g)
        mu = gr.slope_of(set(range(len(gr.nodes))))
        eq = _equal_slope_proper(gr, mu) if mu is not None else None
        chosen = set(range(len(gr.nodes))) if eq is None else eq
        grp = {back[x] for x in chosen}
        factors.append(grp)
        remaining -= grp
    return factors


def jh_graded(f: ParabolicSheaf, g: GeneratingChart | None = None) -> ParabolicSheaf:
    """The associated graded of a Jordan-Hoelder chain (the polystable associate)."""
    if f.is_zero():
        return f
    return _masked(f, jh_factors(f, g))


def s_equivalent(f: ParabolicSheaf, h: ParabolicSheaf, g: GeneratingChart | None = None) -> bool:
    return is_isomorphic(jh_graded(f, g), jh_graded(h, g))


def is_polystable(f: ParabolicSheaf, g: GeneratingChart | None = None) -> bool:
    return is_isomorphic(jh_graded(f, g), f)


# ---------------------------------------------------------------- pullback classification

@dataclass(frozen=True)
class SliceData:
    direction: int
    index: int
    inner: ParabolicSheaf


def _drop(e: FormalScalar, i: int) -> FormalScalar:
    """Forget direction i of a scalar; terms using the vanishing section s_i are zero."""
    return FormalScalar(tuple((x[:i] + x[i + 1:], c) for x, c in e.terms if not x[i]))


def slice_decomposition(f: ParabolicSheaf) -> SliceData | None:
    """Find f = I^i_{n,j}(F): a single nonzero slice in a zero-flagged direction i
    with zero maps along i."""
    from fractions import Fraction as Fr

    n = f.kummer.level
    if n is None:
        raise StabilityError("slices are defined on free towers")
    for i in range(f.chart.r):
        if i not in f.chart.zero_flags:
            continue
        slices = {f.reps[c][i] for c in range(len(f.reps)) if f.rank_of(c)}
        if len(slices) != 1:
            continue
        if any(not f.matrix(c, i).is_zero() for c in range(len(f.reps))):
            continue
        a = slices.pop()
        j = n if a == 0 else int(-a * n)
        inner_chart = f.chart.drop_direction(i)
        at = Fr(-j, n)

        def lift(u, at=at, i=i):
            return tuple(u[:i]) + (at,) + tuple(u[i:])

        def summands(u, lift=lift):
            return f.piece_at(lift(u))

        def matrix(u, gi, lift=lift, i=i):
            m = f.path_matrix(lift(u), [gi if gi < i else gi + 1])[1]
            return Mat(m.nrows, m.ncols, tuple(tuple(_drop(e, i) for e in row) for row in m.rows))

        inner = ParabolicSheaf.build(inner_chart, summands, matrix)
        if is_isomorphic(embed_slice(inner, f.chart, i, j, n), f):
            return SliceData(i, j, inner)
    return None


def classify_nonstable_pullback(f: ParabolicSheaf, m: int) -> SliceData | None:
    """None when the level-m pullback of the stable sheaf f stays stable,
    otherwise the slice presentation f = I^i_{n,j}(F)."""
    from .root_ops import ExtensionStep, pullback

    n = f.kummer.level
    if n is None or m % n:
        raise StabilityError("needs a free tower with n dividing m")
    if verdict(f).status != "stable":
        raise StabilityError("input must be stable")
    up = pullback(f, ExtensionStep.levels(f.chart.r, n, m))
    if verdict(up).status == "stable":
        return None
    found = slice_decomposition(f)
    if found is None:
        raise StabilityError("pullback is not stable but f is not a slice sheaf")
    return found
