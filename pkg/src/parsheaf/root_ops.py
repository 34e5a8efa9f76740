"""Pullback, pushforward and twisted pushforward along root-stack projections."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import floor

from .base_chart import Chart
from .exact import QuotientSpace, Vec, add, dot, rank, solve, sub, zero
from .monoid_lattice import KummerExtension, MonoidError, _functional, decompose, membership
from .parabolic_core import FormalScalar, Mat, ParabolicSheaf, SheafError, is_isomorphic, shift


@dataclass(frozen=True)
class ExtensionStep:
    """P in Q in Q', both Kummer over the same P."""

    source: KummerExtension
    target: KummerExtension

    def __post_init__(self):
        if self.source.p.generators != self.target.p.generators:
            raise MonoidError("both extensions must share P")
        for g in self.source.q_gens:
            if not membership(self.target.q, g):
                raise MonoidError(f"Q generator {tuple(map(str, g))} is not in Q'")

    @classmethod
    def levels(cls, r: int, n: int, m: int) -> "ExtensionStep":
        if m % n:
            raise MonoidError("level n must divide m")
        return cls(KummerExtension.free(r, n), KummerExtension.free(r, m))

    @property
    def free_levels(self) -> tuple[int, int] | None:
        n, m = self.source.level, self.target.level
        if n is None or m is None:
            return None
        return n, m

    @property
    def k(self) -> int | None:
        lv = self.free_levels
        return None if lv is None else lv[1] // lv[0]


def _chart_for(f: ParabolicSheaf, k: KummerExtension) -> Chart:
    return f.chart.with_kummer(k)


def _floor_to(v: Vec, n: int) -> Vec:
    return tuple(Fraction(floor(x * n), n) for x in v)


def pullback(f: ParabolicSheaf, step: ExtensionStep, bound: int | None = None) -> ParabolicSheaf:
    """pi^* f: the colimit of f over {u in Q^gp : u <= v'} at every weight v'."""
    if f.kummer != step.source:
        raise SheafError("sheaf does not live on the source extension of the step")
    if step.free_levels is not None:
        return _pullback_free(f, step)
    return _Colimit(f, step, bound).sheaf()


def _pullback_free(f: ParabolicSheaf, step: ExtensionStep) -> ParabolicSheaf:
    n, m = step.free_levels
    chart = _chart_for(f, step.target)

    def summands(v):
        return f.piece_at(_floor_to(v, n))

    def matrix(v, i):
        lo = _floor_to(v, n)
        up = _floor_to(add(v, step.target.q_gens[i]), n)
        if lo == up:
            return Mat.identity(len(summands(v)), chart.r)
        return f.path_matrix(lo, [i])[1]

    return ParabolicSheaf.build(chart, summands, matrix)


class _Colimit:
    """Colimits over truncated lower sets, for diagrams whose arrows are
    zero or constant (zero-content) matrices."""

    def __init__(self, f: ParabolicSheaf, step: ExtensionStep, bound: int | None):
        self.f = f
        self.step = step
        t = step.target
        self.ell = _functional(tuple(t.q_gens))
        b = bound if bound is not None else sum(t.orders) + t.r
        self.height = b * max(dot(self.ell, g) for g in t.q_gens)
        self._cache: dict[tuple[Vec, Fraction], dict] = {}

    def diagram(self, v: Vec, height: Fraction) -> dict:
        key = (v, height)
        if key in self._cache:
            return self._cache[key]
        f, t = self.f, self.step.target
        seen = {zero(t.r)}
        frontier = [zero(t.r)]
        while frontier:
            nxt = []
            for w in frontier:
                for g in t.q_gens:
                    w2 = add(w, g)
                    if w2 not in seen and dot(self.ell, w2) <= height:
                        seen.add(w2)
                        nxt.append(w2)
            frontier = nxt
        elems = sorted({sub(v, w) for w in seen if f.kummer.in_qgp(sub(v, w))}, reverse=True)
        members = set(elems)
        index, slots = {}, []
        for u in elems:
            for s, c in enumerate(f.piece_at(u)):
                index[(u, s)] = len(slots)
                slots.append(c)
        maximal = [u for u in elems
                   if all(not membership(t.q, sub(sub(v, u), q)) for q in f.q_gens)]
        relations = []
        for u in elems:
            cu = f.class_index(u)
            for j, q in enumerate(f.q_gens):
                u2 = add(u, q)
                if u2 not in members:
                    continue
                m = f.matrix(cu, j)
                for s in range(m.ncols):
                    rel = [Fraction(0)] * len(slots)
                    rel[index[(u, s)]] = Fraction(1)
                    for a in range(m.nrows):
                        c = m[a, s].scalar_value()
                        if c is None:
                            raise SheafError("colimit regime unsupported: a connecting map is neither zero nor constant")
                        rel[index[(u2, a)]] -= c
                    relations.append(rel)
        space = QuotientSpace(len(slots), relations)
        d = {"elements": elems, "index": index, "slots": slots, "maximal": maximal, "space": space}
        self._cache[key] = d
        return d

    def unit(self, d: dict, u: Vec, s: int) -> list[Fraction]:
        e = [Fraction(0)] * len(d["slots"])
        e[d["index"][(u, s)]] = Fraction(1)
        return d["space"].reduce(e)

    @cached_property
    def reps(self) -> tuple[Vec, ...]:
        return self.step.target.default_reps

    @cached_property
    def bases(self) -> list[list[tuple[Vec, int]]]:
        """Greedy basis of each colimit, offsets relative to the representative."""
        out = []
        for v in self.reps:
            d = self.diagram(v, self.height)
            chosen, vecs = [], []
            for u in d["maximal"]:
                for s in range(len(self.f.piece_at(u))):
                    w = self.unit(d, u, s)
                    if any(w) and rank(vecs + [w]) > len(vecs):
                        vecs.append(w)
                        chosen.append((sub(u, v), s))
            if len(chosen) != d["space"].quotient_dim:
                raise SheafError("colimit is not spanned by its maximal elements; raise the truncation bound")
            out.append(chosen)
        return out

    def sheaf(self) -> ParabolicSheaf:
        f, t = self.f, self.step.target
        chart = _chart_for(f, t)
        summands = [[f.piece_at(add(v, off))[s] for off, s in basis]
                    for v, basis in zip(self.reps, self.bases)]
        g = ParabolicSheaf(chart, self.reps, summands)
        trans = {}
        for c, v in enumerate(self.reps):
            for i, q in enumerate(t.q_gens):
                tc, tw = g.target(c, i)
                rep2 = self.reps[tc]
                d2 = self.diagram(rep2, self.height + dot(self.ell, q))
                cols = [self.unit(d2, add(rep2, off), s) for off, s in self.bases[tc]]
                if rank(cols) < len(cols):
                    raise SheafError("truncated colimits disagree; raise the truncation bound")
                rows = [[FormalScalar()] * len(self.bases[c]) for _ in cols]
                for j, (off, s) in enumerate(self.bases[c]):
                    u = sub(add(v, off), tw)
                    x = solve(cols, self.unit(d2, u, s))
                    if x is None:
                        raise SheafError("colimit map has no coordinates in the target basis")
                    for a, coef in enumerate(x):
                        if coef:
                            rows[a][j] = FormalScalar.unit(chart.r, coef)
                trans[(c, i)] = Mat(len(cols), len(self.bases[c]), tuple(tuple(r) for r in rows))
        g.transitions = trans
        return g


def pushforward(g: ParabolicSheaf, step: ExtensionStep) -> ParabolicSheaf:
    """pi_* g: restriction to the weights of Q^gp."""
    if g.kummer != step.target:
        raise SheafError("sheaf does not live on the target extension of the step")
    src = step.source
    chart = _chart_for(g, src)
    paths = []
    for q in src.q_gens:
        e = decompose(step.target.q, q)
        paths.append([i for i, a in enumerate(e) for _ in range(a)])

    def summands(v):
        return g.piece_at(v)

    def matrix(v, i):
        return g.path_matrix(v, paths[i])[1]

    return ParabolicSheaf.build(chart, summands, matrix)


def twisted_pushforward(f: ParabolicSheaf, d, n: int) -> ParabolicSheaf:
    """f^(d) at level n: the level-n piece at e/n is f at d/m + e/n."""
    m = f.kummer.level
    if m is None:
        raise SheafError("twisted pushforward needs a free tower")
    if m % n:
        raise SheafError(f"level {n} does not divide {m}")
    k = m // n
    d = tuple(int(x) for x in d)
    if len(d) != f.chart.r or any(not 0 <= x < k for x in d):
        raise SheafError(f"twist entries must satisfy 0 <= d_i < {k}")
    shifted = shift(f, tuple(Fraction(x, m) for x in d))
    return pushforward(shifted, ExtensionStep.levels(f.chart.r, n, m))


def weighted_structure_sheaf(chart: Chart, d) -> ParabolicSheaf:
    """L_n^(d): the structure sheaf shifted by the weight d/n."""
    from .parabolic_core import structure_sheaf

    n = chart.kummer.level
    return shift(structure_sheaf(chart), tuple(Fraction(int(x), n) for x in d))


def adjunction_defect(f: ParabolicSheaf, step: ExtensionStep) -> bool:
    """True when f -> pi_* pi^* f is an isomorphism."""
    return is_isomorphic(pushforward(pullback(f, step), step), f)


def descends(g: ParabolicSheaf, step: ExtensionStep) -> bool:
    """True when pi^* pi_* g is isomorphic to g, i.e. g comes from the source level."""
    return is_isomorphic(pullback(pushforward(g, step), step), g)


def weight_multiset_identity(n: int, m: int) -> bool:
    """{a : 1 <= a <= m} equals {k b + c - k : 1 <= b <= n, 1 <= c <= k} as multisets."""
    if m % n:
        raise ValueError("n must divide m")
    k = m // n
    lhs = list(range(1, m + 1))
    rhs = sorted(k * b + c - k for b in range(1, n + 1) for c in range(1, k + 1))
    return lhs == rhs


def index_identity_table(limit: int = 12) -> list[tuple[int, int, bool]]:
    return [(n, m, weight_multiset_identity(n, m))
            for m in range(1, limit + 1) for n in range(1, m + 1) if m % n == 0]
