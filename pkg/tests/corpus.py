"""Random and hand-built sheaves shared by the test modules."""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from parsheaf.base_chart import BaseGeometry, Chart, standard_log_point
from parsheaf.monoid_lattice import KummerExtension, MonoidPresentation
from parsheaf.parabolic_core import (FormalScalar, Mat, ParabolicSheaf, direct_sum, embed_slice, shift, single_node,
                                     trivial_parabolic)


def base_charts(r: int, n: int) -> list[Chart]:
    """One chart per base geometry we sample from, at level n with r directions."""
    k = KummerExtension.free(r, n)
    out = [standard_log_point(r, n)]
    if r == 1:
        out.append(Chart(k, BaseGeometry.p1(), [[1]], []))
        out.append(Chart(k, BaseGeometry.curve(1, 2), [[1]], [0]))
    else:
        out.append(Chart(k, BaseGeometry.p1xp1(), [[1, 0], [0, 1]], []))
        out.append(Chart(k, BaseGeometry.p1xp1(), [[1, 1], [0, 0]], [1]))
    return out


def _line(chart: Chart, rng: random.Random) -> ParabolicSheaf:
    n = chart.kummer.level
    r = chart.r
    npic = chart.base.pic_rank
    c = tuple(rng.randint(-2, 2) for _ in range(npic))
    f = trivial_parabolic(chart, [c])
    s = tuple(Fraction(rng.randrange(n), n) for _ in range(r))
    return shift(f, s)


def _slice(chart: Chart, rng: random.Random) -> ParabolicSheaf | None:
    """A slice sheaf, which only exists where the section of its direction vanishes."""
    n = chart.kummer.level
    zero = [i for i in range(chart.r) if i in chart.zero_flags]
    if not zero or chart.base.kind != "log_point":
        return None
    i = rng.choice(zero)
    inner_chart = chart.drop_direction(i)
    v = tuple(Fraction(rng.randrange(n), n) for _ in range(chart.r - 1))
    inner = single_node(inner_chart, v, ())
    return embed_slice(inner, chart, i, rng.randint(1, n), n)


def random_sheaf(chart: Chart, rng: random.Random, max_summands: int = 4) -> ParabolicSheaf:
    """A direct sum of shifted line bundles and slice sheaves."""
    parts = []
    for _ in range(rng.randint(1, max_summands)):
        g = _slice(chart, rng) if rng.random() < 0.4 else None
        parts.append(g if g is not None else _line(chart, rng))
    out = parts[0]
    for g in parts[1:]:
        out = direct_sum(out, g)
    return out


def tower_corpus(count: int, seed: int = 7, max_level: int = 8, max_summands: int = 4):
    """(f, n, m) triples with n | m <= max_level and both levels on rank <= 2."""
    rng = random.Random(seed)
    pairs = [(n, m) for m in range(2, max_level + 1) for n in range(1, m) if m % n == 0]
    out = []
    while len(out) < count:
        r = rng.choice((1, 1, 2))
        n, m = rng.choice(pairs)
        if r == 2 and m > 4:
            continue
        chart = rng.choice(base_charts(r, n))
        out.append((random_sheaf(chart, rng, max_summands), n, m))
    return out


def simplicial_corpus() -> list[MonoidPresentation]:
    """Saturated simplicial monoids of rank at most 3."""
    gens = [
        ((1,),),
        ((1, 0), (0, 1)),
        ((1, 0, 0), (0, 1, 0), (0, 0, 1)),
        ((2, 0), (1, 1), (0, 2)),
        ((1, 0), (1, 1), (1, 2)),
        ((1, 0), (1, 1), (1, 2), (1, 3)),
        ((1, 0), (1, 1), (1, 2), (1, 3), (1, 4)),
        ((3, 0), (2, 1), (1, 2), (0, 3)),
        ((2, 0), (1, 1), (0, 2), (3, 1)),
        ((2, 0, 0), (0, 2, 0), (0, 0, 2), (1, 1, 1)),
        ((2, 0, 0), (0, 2, 0), (0, 0, 1), (1, 1, 0)),
        ((3, 0, 0), (0, 3, 0), (0, 0, 3), (1, 1, 1), (2, 2, 2)),
    ]
    return [MonoidPresentation(len(g[0]), g) for g in gens]


# ---------------------------------------------------------------- log point enumeration

def _zero_one(a: int, b: int) -> list[tuple[tuple[int, ...], ...]]:
    return [tuple(bits[i * b:(i + 1) * b] for i in range(a)) for bits in itertools.product((0, 1), repeat=a * b)]


def _mul(x, y, a: int, b: int, c: int):
    return tuple(tuple(sum(x[i][k] * y[k][j] for k in range(b)) for j in range(c)) for i in range(a))


class LogPointEnumeration:
    """All sheaves on the level-n root of the rank-r standard log point whose classes
    carry at most max_summands copies of k and whose arrows are 0/1 matrices.

    With prune_sinks, branches are cut as soon as some summand maps to zero along
    every generator while the total rank exceeds one: that summand alone is a proper
    coordinate subsheaf, so no completion is stable. `pruned` counts those cuts.
    """

    def __init__(self, r: int, n: int, max_summands: int = 2, prune_sinks: bool = True):
        self.r, self.n, self.max_summands, self.prune_sinks = r, n, max_summands, prune_sinks
        self.classes = list(itertools.product(range(n), repeat=r))
        self.keys = [(c, i) for c in self.classes for i in range(r)]
        self.pos = {k: t for t, k in enumerate(self.keys)}
        self.pruned = 0
        cons = []
        for c in self.classes:
            for i in range(r):
                path = [c]
                for _ in range(n - 1):
                    path.append(self.next(path[-1], i))
                cons.append(("loop", [(p, i) for p in path]))
                for j in range(i + 1, r):
                    cons.append(("square", [(c, i), (self.next(c, i), j), (c, j), (self.next(c, j), i)]))
        self.by_last: dict[int, list] = {t: [] for t in range(len(self.keys))}
        for kind, ks in cons:
            self.by_last[max(self.pos[k] for k in ks)].append((kind, ks))

    def next(self, c, i):
        return tuple((x + (k == i)) % self.n for k, x in enumerate(c))

    def run(self):
        """Yield (sizes, matrices) for every size profile in turn."""
        for sizes in itertools.product(range(self.max_summands + 1), repeat=len(self.classes)):
            if any(sizes):
                yield from self._leaves(dict(zip(self.classes, sizes)), None)

    def sample(self, rng: random.Random):
        """One random valid sheaf: random sizes, then a shuffled depth-first search."""
        while True:
            sizes = [rng.randint(0, self.max_summands) for _ in self.classes]
            if not any(sizes):
                continue
            leaf = next(self._leaves(dict(zip(self.classes, sizes)), rng), None)
            if leaf is not None:
                return leaf

    def _leaves(self, sz: dict, rng):
        keys, pos = self.keys, self.pos
        total = sum(sz.values())

        def shape(k):
            c, i = k
            return sz[self.next(c, i)], sz[c]

        choices = [_zero_one(*shape(k)) for k in keys]
        assign: list = [None] * len(keys)

        def compose(ks):
            d = sz[ks[0][0]]
            m = tuple(tuple(int(a == b) for b in range(d)) for a in range(d))
            for k in ks:
                a, b = shape(k)
                m = _mul(assign[pos[k]], m, a, b, d)
            return m

        def ok(t):
            for kind, ks in self.by_last[t]:
                if kind == "loop":
                    if any(any(row) for row in compose(ks)):
                        return False
                elif compose(ks[:2]) != compose(ks[2:]):
                    return False
            c, i = keys[t]
            if self.prune_sinks and total > 1 and i == self.r - 1:
                outs = [assign[pos[(c, g)]] for g in range(self.r)]
                for col in range(sz[c]):
                    if not any(m[row][col] for m in outs for row in range(len(m))):
                        self.pruned += 1
                        return False
            return True

        def rec(t):
            if t == len(keys):
                yield tuple(sz[c] for c in self.classes), dict(zip(keys, assign))
                return
            opts = list(choices[t])
            if rng is not None:
                rng.shuffle(opts)
            for m in opts:
                assign[t] = m
                if ok(t):
                    yield from rec(t + 1)
            assign[t] = None

        return rec(0)

    def sheaf(self, sizes, matrices) -> ParabolicSheaf:
        chart = standard_log_point(self.r, self.n)
        reps = chart.kummer.default_reps
        f = ParabolicSheaf(chart, reps, [[] for _ in reps])
        where = {c: f.class_index(tuple(Fraction(x, self.n) for x in c)) for c in self.classes}
        summands = [[] for _ in reps]
        for c, s in zip(self.classes, sizes):
            summands[where[c]] = [()] * s
        trans = {}
        for (c, i), m in matrices.items():
            rows = tuple(tuple(FormalScalar.unit(self.r, x) if x else FormalScalar() for x in row) for row in m)
            trans[(where[c], i)] = Mat(len(m), sizes[self.classes.index(c)], rows)
        return ParabolicSheaf(chart, reps, summands, trans)


def has_proper_closed_set(sizes, matrices, r: int, n: int) -> bool:
    """Direct oracle: some node's forward closure under nonzero entries is proper."""
    classes = list(itertools.product(range(n), repeat=r))
    nodes = [(c, a) for c, s in zip(classes, sizes) for a in range(s)]
    if len(nodes) <= 1:
        return False

    def nxt(c, i):
        return tuple((x + (k == i)) % n for k, x in enumerate(c))

    for start in nodes:
        seen, todo = {start}, [start]
        while todo:
            c, a = todo.pop()
            for i in range(r):
                m = matrices[(c, i)]
                for b in range(len(m)):
                    if m[b][a] and (nxt(c, i), b) not in seen:
                        seen.add((nxt(c, i), b))
                        todo.append((nxt(c, i), b))
        if len(seen) < len(nodes):
            return True
    return False
