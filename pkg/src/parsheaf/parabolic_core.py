"""Parabolic sheaves with respect to a chart, stored on one representative
weight per class of Q^gp/P^gp.

Each class carries a list of line bundle classes (the piece at its
representative). For every class w and every indecomposable q_i of Q there
is a matrix from the piece at rep(w) to the piece at rep(w) + q_i, which is
the piece at rep(w') twisted by L_t with t = rep(w) + q_i - rep(w') in P^gp.
Matrix entries are FormalScalars: sums of c * s^x where s^x is the product
of distinguished sections indexed by an element x of P.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import ceil
from typing import Callable, Iterable, Sequence

from .base_chart import Chart, PicClass, euler_sum, pic_add, pic_neg
from .exact import Vec, add, frac, sub, vec, zero
from .monoid_lattice import KummerExtension, decompose

Content = tuple[int, ...]


class SheafError(ValueError):
    pass


# ---------------------------------------------------------------- scalars

@dataclass(frozen=True)
class FormalScalar:
    """A finite sum of coefficient * section monomial, keyed by elements of P."""

    terms: tuple[tuple[Content, Fraction], ...] = ()

    def __post_init__(self):
        acc: dict[Content, Fraction] = {}
        for x, c in self.terms:
            x = tuple(int(a) for a in x)
            acc[x] = acc.get(x, Fraction(0)) + frac(c)
        object.__setattr__(self, "terms", tuple(sorted((x, c) for x, c in acc.items() if c != 0)))

    @classmethod
    def unit(cls, r: int, c=1) -> "FormalScalar":
        return cls((((0,) * r, frac(c)),))

    @classmethod
    def section(cls, x: Sequence[int], c=1) -> "FormalScalar":
        return cls(((tuple(x), frac(c)),))

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __add__(self, other: "FormalScalar") -> "FormalScalar":
        return FormalScalar(self.terms + other.terms)

    def __mul__(self, other: "FormalScalar") -> "FormalScalar":
        return FormalScalar(tuple((tuple(a + b for a, b in zip(x, y)), c * d)
                                  for x, c in self.terms for y, d in other.terms))

    def scaled(self, c) -> "FormalScalar":
        c = frac(c)
        return FormalScalar(tuple((x, c * a) for x, a in self.terms))

    def evaluate(self, chart: Chart) -> "FormalScalar":
        kept = tuple((x, c) for x, c in self.terms if not chart.section_is_zero(x))
        return self if len(kept) == len(self.terms) else FormalScalar(kept)

    def scalar_value(self) -> Fraction | None:
        """The rational value when every term has trivial section content."""
        if not self.terms:
            return Fraction(0)
        if all(not any(x) for x, _ in self.terms):
            return sum((c for _, c in self.terms), Fraction(0))
        return None

    def ratio_to(self, other: "FormalScalar") -> Fraction | None:
        """mu with self == mu * other, for nonzero other."""
        if len(self.terms) != len(other.terms) or not other.terms:
            return None
        mu = None
        for (x, c), (y, d) in zip(self.terms, other.terms):
            if x != y:
                return None
            q = c / d
            if mu is None:
                mu = q
            elif q != mu:
                return None
        return mu

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        from .exact import fmt

        parts = []
        for x, c in self.terms:
            if any(x):
                parts.append(f"{fmt(c)}*s^{list(x)}")
            else:
                parts.append(fmt(c))
        return " + ".join(parts)


@dataclass(frozen=True)
class Mat:
    """Dense matrix of FormalScalars; rows index the target summands."""

    nrows: int
    ncols: int
    rows: tuple[tuple[FormalScalar, ...], ...] = field(default=None)

    def __post_init__(self):
        if self.rows is None:
            z = FormalScalar()
            object.__setattr__(self, "rows", tuple((z,) * self.ncols for _ in range(self.nrows)))
        if len(self.rows) != self.nrows or any(len(r) != self.ncols for r in self.rows):
            raise SheafError(f"matrix shape mismatch, expected {self.nrows}x{self.ncols}")

    @classmethod
    def identity(cls, n: int, r: int, section: Sequence[int] | None = None, c=1) -> "Mat":
        d = FormalScalar.section(section, c) if section is not None else FormalScalar.unit(r, c)
        z = FormalScalar()
        return cls(n, n, tuple(tuple(d if i == j else z for j in range(n)) for i in range(n)))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[FormalScalar]], ncols: int | None = None) -> "Mat":
        rows = tuple(tuple(r) for r in rows)
        if ncols is None:
            ncols = len(rows[0]) if rows else 0
        return cls(len(rows), ncols, rows)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __matmul__(self, other: "Mat") -> "Mat":
        if self.ncols != other.nrows:
            raise SheafError("matrix product shape mismatch")
        out = []
        for i in range(self.nrows):
            row = []
            for j in range(other.ncols):
                acc = FormalScalar()
                for k in range(self.ncols):
                    a = self.rows[i][k]
                    if a.terms:
                        b = other.rows[k][j]
                        if b.terms:
                            acc = acc + a * b
                row.append(acc)
            out.append(tuple(row))
        return Mat(self.nrows, other.ncols, tuple(out))

    def evaluate(self, chart: Chart) -> "Mat":
        return Mat(self.nrows, self.ncols, tuple(tuple(e.evaluate(chart) for e in r) for r in self.rows))

    def is_zero(self) -> bool:
        return all(e.is_zero() for r in self.rows for e in r)

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "Mat":
        return Mat(len(rows), len(cols), tuple(tuple(self.rows[i][j] for j in cols) for i in rows))

    def nonzero(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.nrows) for j in range(self.ncols) if self.rows[i][j].terms]


def block_diag(a: Mat, b: Mat) -> Mat:
    z = FormalScalar()
    rows = [tuple(a.rows[i]) + (z,) * b.ncols for i in range(a.nrows)]
    rows += [(z,) * a.ncols + tuple(b.rows[i]) for i in range(b.nrows)]
    return Mat(a.nrows + b.nrows, a.ncols + b.ncols, tuple(rows))


def _laurent_matrix(m: Mat):
    """The matrix over Q(t_1..t_r) with s^x read as the Laurent monomial t^x."""
    import sympy

    r = max((len(x) for row in m.rows for e in row for x, _ in e.terms), default=0)
    ts = sympy.symbols(f"t0:{r}") if r else ()
    def entry(e: FormalScalar):
        return sum((sympy.Rational(c.numerator, c.denominator) * sympy.Mul(*[t**k for t, k in zip(ts, x)])
                    for x, c in e.terms), sympy.Integer(0))
    return sympy.Matrix(m.nrows, m.ncols, [entry(e) for row in m.rows for e in row])


def generic_rank(m: Mat) -> int:
    """Rank with generic nonzero sections treated as independent transcendentals."""
    if m.nrows == 0 or m.ncols == 0:
        return 0
    scal = [[e.scalar_value() for e in row] for row in m.rows]
    if all(v is not None for row in scal for v in row):
        from .exact import rank

        return rank(scal)
    return _laurent_matrix(m).rank()


def is_iso(m: Mat) -> bool:
    """Invertible as a map of sheaves: square with determinant a nonzero constant."""
    if m.nrows != m.ncols:
        return False
    if m.nrows == 0:
        return True
    scal = [[e.scalar_value() for e in row] for row in m.rows]
    if all(v is not None for row in scal for v in row):
        from .exact import rank

        return rank(scal) == m.nrows
    det = _laurent_matrix(m).det()
    import sympy

    det = sympy.simplify(det)
    return bool(det.is_number and det != 0)


# ---------------------------------------------------------------- sheaves

class ParabolicSheaf:
    """Pieces on class representatives plus generator matrices."""

    def __init__(self, chart: Chart, reps: Sequence[Sequence], summands: Sequence[Sequence[PicClass]],
                 transitions: dict[tuple[int, int], Mat] | None = None):
        self.chart = chart
        self.reps: tuple[Vec, ...] = tuple(vec(v) for v in reps)
        self.summands: tuple[tuple[PicClass, ...], ...] = tuple(
            tuple(chart.base.check_class(c) for c in s) for s in summands)
        if len(self.reps) != len(self.summands):
            raise SheafError("one summand list per class representative")
        self.transitions: dict[tuple[int, int], Mat] = dict(transitions or {})

    def __repr__(self):
        return f"ParabolicSheaf({len(self.reps)} classes, ranks {[len(s) for s in self.summands]})"

    @property
    def kummer(self) -> KummerExtension:
        return self.chart.kummer

    @property
    def q_gens(self) -> tuple[Vec, ...]:
        return self.kummer.q_gens

    @cached_property
    def _index(self) -> dict[Vec, int]:
        idx: dict[Vec, int] = {}
        for i, v in enumerate(self.reps):
            idx.setdefault(self.kummer.class_key(v), i)
        return idx

    def class_index(self, v: Sequence) -> int:
        v = vec(v)
        try:
            return self._index[self.kummer.class_key(v)]
        except KeyError:
            raise SheafError(f"no class stored for the weight {tuple(map(str, v))}") from None

    def twist_of(self, v: Sequence) -> tuple[int, Vec]:
        """(class index, t) with v = rep + t and t in P^gp."""
        c = self.class_index(v)
        return c, sub(vec(v), self.reps[c])

    @cached_property
    def _targets(self) -> dict[tuple[int, int], tuple[int, Vec]]:
        out = {}
        for c, v in enumerate(self.reps):
            for i, q in enumerate(self.q_gens):
                out[(c, i)] = self.twist_of(add(v, q))
        return out

    def target(self, c: int, i: int) -> tuple[int, Vec]:
        return self._targets[(c, i)]

    def rank_of(self, c: int) -> int:
        return len(self.summands[c])

    @cached_property
    def _evaluated(self) -> dict[tuple[int, int], Mat]:
        out = {}
        for c in range(len(self.reps)):
            for i in range(len(self.q_gens)):
                tc, _ = self.target(c, i)
                m = self.transitions.get((c, i))
                if m is None:
                    m = Mat(self.rank_of(tc), self.rank_of(c))
                out[(c, i)] = m.evaluate(self.chart)
        return out

    def matrix(self, c: int, i: int) -> Mat:
        """Evaluated matrix for generator i out of class c."""
        return self._evaluated[(c, i)]

    def piece_at(self, v: Sequence) -> tuple[PicClass, ...]:
        c, t = self.twist_of(v)
        tw = self.chart.pic(t)
        return tuple(pic_add(s, tw) for s in self.summands[c])

    def path_matrix(self, v: Sequence, steps: Iterable[int]) -> tuple[Vec, Mat]:
        """Composite from the piece at v along generator steps; returns the endpoint too."""
        v = vec(v)
        c = self.class_index(v)
        m = Mat.identity(self.rank_of(c), self.chart.r)
        for i in steps:
            c = self.class_index(v)
            m = self.matrix(c, i) @ m
            v = add(v, self.q_gens[i])
        return v, m

    def total_rank(self) -> int:
        return sum(len(s) for s in self.summands)

    def is_zero(self) -> bool:
        return self.total_rank() == 0

    @classmethod
    def build(cls, chart: Chart, summand_fn: Callable[[Vec], Sequence[PicClass]],
              matrix_fn: Callable[[Vec, int], Mat], reps: Sequence[Vec] | None = None) -> "ParabolicSheaf":
        reps = list(reps) if reps is not None else list(chart.kummer.default_reps)
        summands = [tuple(summand_fn(v)) for v in reps]
        f = cls(chart, reps, summands)
        trans = {}
        for c, v in enumerate(reps):
            for i in range(len(chart.kummer.q_gens)):
                trans[(c, i)] = matrix_fn(v, i)
        f.transitions = trans
        f.__dict__.pop("_evaluated", None)
        return f


def piece(f: ParabolicSheaf, v: Sequence) -> tuple[PicClass, ...]:
    """The piece E_v as a list of line bundle classes."""
    try:
        return f.piece_at(v)
    except SheafError:
        if not f.kummer.in_qgp(vec(v)):
            raise SheafError("weight is not in Q^gp") from None
        raise


def zero_sheaf(chart: Chart) -> ParabolicSheaf:
    reps = chart.kummer.default_reps
    return ParabolicSheaf(chart, reps, [()] * len(reps))


# ---------------------------------------------------------------- validation

def validate_sheaf(f: ParabolicSheaf, relation_degree: int | None = None) -> list[str]:
    """Diagnostics for class completeness, twists, commuting squares,
    relations of Q and pseudo-periodicity; empty when all hold."""
    k = f.kummer
    out: list[str] = []
    seen: dict[Vec, int] = {}
    for c, v in enumerate(f.reps):
        if not k.in_qgp(v):
            out.append(f"class {c}: representative {_show(v)} is not in Q^gp")
            continue
        key = k.class_key(v)
        if key in seen:
            out.append(f"class {c}: representative {_show(v)} repeats class {seen[key]}")
        seen[key] = c
    if out:
        return out
    if len(seen) != k.group_order:
        have = set(seen)
        for v in k.default_reps:
            if k.class_key(v) not in have:
                out.append(f"missing weight class of {_show(v)}")
        return out

    ngen = len(k.q_gens)
    for (c, i), m in f.transitions.items():
        if not (0 <= c < len(f.reps) and 0 <= i < ngen):
            out.append(f"transition ({c}, {i}) refers to an unknown class or generator")
            continue
        tc, _ = f.target(c, i)
        if (m.nrows, m.ncols) != (f.rank_of(tc), f.rank_of(c)):
            out.append(f"class {c}, generator {i}: matrix is {m.nrows}x{m.ncols}, "
                       f"expected {f.rank_of(tc)}x{f.rank_of(c)}")
    if out:
        return out

    for c in range(len(f.reps)):
        for i in range(ngen):
            tc, t = f.target(c, i)
            if not k.in_pgp(t):
                out.append(f"class {c}, generator {i}: twist {_show(t)} is not in P^gp")
                continue
            src = f.summands[c]
            tgt = [pic_add(s, f.chart.pic(t)) for s in f.summands[tc]]
            raw = f.transitions.get((c, i))
            if raw is None:
                continue
            for a, b in raw.nonzero():
                for x, _ in raw[a, b].terms:
                    if decompose(k.p, x) is None:
                        out.append(f"class {c}, generator {i}: entry ({a},{b}) uses s^{list(x)} with exponent outside P")
                    elif not f.chart.section_is_zero(x) and tgt[a] != pic_add(src[b], f.chart.pic(x)):
                        out.append(f"class {c}, generator {i}: entry ({a},{b}) maps {src[b]} to {tgt[a]} "
                                   f"by a section of {f.chart.pic(x)}")
    if out:
        return out

    for c, v in enumerate(f.reps):
        for i in range(ngen):
            for j in range(i + 1, ngen):
                _, a = f.path_matrix(v, [i, j])
                _, b = f.path_matrix(v, [j, i])
                if a != b:
                    out.append(f"class {c}: square for generators {i},{j} does not commute")

    if not k.q.generators or not _q_is_free(k):
        out += _relation_diagnostics(f, relation_degree)

    for pi, p in enumerate(k.p_gens):
        steps = decompose(k.q, p)
        path = [i for i, e in enumerate(steps) for _ in range(e)]
        vanishes = f.chart.section_is_zero(p)
        for c, v in enumerate(f.reps):
            n = f.rank_of(c)
            _, m = f.path_matrix(v, path)
            if vanishes:
                if not m.is_zero():
                    out.append(f"class {c}: loop around P generator {pi} must be zero (its section vanishes)")
                continue
            unit = None
            ok = True
            for a in range(n):
                for b in range(n):
                    e = m[a, b]
                    if a != b:
                        ok = ok and e.is_zero()
                        continue
                    mu = e.ratio_to(FormalScalar.section(tuple(int(x) for x in p)))
                    if mu is None or mu == 0 or (unit is not None and mu != unit):
                        ok = False
                    unit = mu if unit is None else unit
            if not ok:
                out.append(f"class {c}: loop around P generator {pi} is not a unit times s^p times the identity")
    return out


def _q_is_free(k: KummerExtension) -> bool:
    from .exact import rank

    return rank(list(k.q_gens)) == len(k.q_gens)


def _relation_diagnostics(f: ParabolicSheaf, degree: int | None) -> list[str]:
    """Path independence for relations among the Q generators (non-free Q)."""
    k = f.kummer
    n = len(k.q_gens)
    degree = degree or max(2, n)
    out = []
    by_sum: dict[Vec, list[tuple[int, ...]]] = {}
    for deg in range(2, degree + 1):
        for combo in itertools.combinations_with_replacement(range(n), deg):
            s = zero(k.r)
            for i in combo:
                s = add(s, k.q_gens[i])
            by_sum.setdefault(s, []).append(combo)
    for s, combos in by_sum.items():
        if len(combos) < 2:
            continue
        for c, v in enumerate(f.reps):
            ref = f.path_matrix(v, combos[0])[1]
            for combo in combos[1:]:
                if f.path_matrix(v, combo)[1] != ref:
                    out.append(f"class {c}: paths {list(combos[0])} and {list(combo)} give different maps")
    return out


# ---------------------------------------------------------------- constructors

def _ceil_vec(v: Vec) -> tuple[int, ...]:
    return tuple(ceil(x) for x in v)


def trivial_parabolic(chart: Chart, e: Sequence[PicClass]) -> ParabolicSheaf:
    """E_v = e twisted by L of the componentwise ceiling of v."""
    n = chart.kummer.level
    if n is None:
        raise SheafError("trivial parabolic structure needs the extension N^r in (1/n)N^r")
    r = chart.r
    e = [chart.base.check_class(c) for c in e]

    def summands(v):
        tw = chart.pic(_ceil_vec(v))
        return [pic_add(c, tw) for c in e]

    def matrix(v, i):
        if v[i] == 0:
            unit = tuple(1 if j == i else 0 for j in range(r))
            return Mat.identity(len(e), r, section=unit)
        return Mat.identity(len(e), r)

    return ParabolicSheaf.build(chart, summands, matrix)


def structure_sheaf(chart: Chart) -> ParabolicSheaf:
    """The structure sheaf O, whose piece at v is L_(floor v)."""
    n = chart.kummer.level
    if n is None:
        raise SheafError("the structure sheaf is built on free towers only")
    from .root_ops import pullback, ExtensionStep

    base = trivial_parabolic(chart.at_level(1), [tuple(0 for _ in range(chart.base.pic_rank))])
    return pullback(base, ExtensionStep(base.kummer, chart.kummer))


@dataclass(frozen=True)
class MYData:
    """A weighted filtration E = F_1 > F_2 > ... > F_k > F_{k+1} = E(-D).

    summands lists the line bundles of E; subsets[i] lists which of them
    are untwisted in F_{i+1} (the others are twisted by -D), so
    subsets[0] must be all of them.
    """

    chart: Chart
    divisor: PicClass
    summands: tuple[PicClass, ...]
    weights: tuple[Fraction, ...]
    subsets: tuple[frozenset[int], ...]

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(frac(a) for a in self.weights))
        object.__setattr__(self, "subsets", tuple(frozenset(s) for s in self.subsets))
        object.__setattr__(self, "summands", tuple(tuple(s) for s in self.summands))
        if len(self.weights) != len(self.subsets):
            raise SheafError("one filtration step per weight")
        if not self.weights:
            raise SheafError("at least one weight is needed")
        if any(not 0 <= a < 1 for a in self.weights):
            raise SheafError("weights must lie in [0, 1)")
        if any(a >= b for a, b in zip(self.weights, self.weights[1:])):
            raise SheafError("weights must increase strictly")
        if self.subsets[0] != frozenset(range(len(self.summands))):
            raise SheafError("F_1 must be all of E")
        if any(not b <= a for a, b in zip(self.subsets, self.subsets[1:])):
            raise SheafError("filtration must decrease")

    @property
    def level(self) -> int:
        from math import lcm

        return lcm(*(a.denominator for a in self.weights))

    def filtration_piece(self, i: int) -> tuple[PicClass, ...]:
        """F_{i+1} as summands (i from 0; i == k gives E(-D))."""
        keep = self.subsets[i] if i < len(self.subsets) else frozenset()
        negd = pic_neg(self.divisor)
        return tuple(s if j in keep else pic_add(s, negd) for j, s in enumerate(self.summands))

    def graded_piece(self, i: int) -> list[int]:
        nxt = self.subsets[i + 1] if i + 1 < len(self.subsets) else frozenset()
        return sorted(self.subsets[i] - nxt)


def my_chart(base, divisor: PicClass, n: int, zero: bool = False) -> Chart:
    """N in (1/n)N sending 1 to the divisor class."""
    return Chart(KummerExtension.free(1, n), base, [[a] for a in divisor], [0] if zero else [])


def from_my_filtration(d: MYData) -> ParabolicSheaf:
    """Pieces E_{a/n} = F_i for -b_i <= a < -b_{i-1} (b_0 = -1, b_{k+1} = n)."""
    n = d.level
    chart = d.chart
    if chart.kummer.level != n:
        chart = chart.at_level(n)
    bs = [int(a * n) for a in d.weights] + [n]

    def step(a: int) -> int:
        return next(i for i, b in enumerate(bs) if -b <= a)

    def summands(v):
        return d.filtration_piece(step(int(v[0] * n)))

    def matrix(v, i):
        a = int(v[0] * n)
        src = d.filtration_piece(step(a))
        if a == 0:
            tgt = [pic_add(s, d.divisor) for s in d.filtration_piece(step(1 - n))]
        else:
            tgt = d.filtration_piece(step(a + 1))
        z = FormalScalar()
        rows = []
        for j in range(len(src)):
            jump = tgt[j] != src[j]
            e = FormalScalar.section((1,)) if jump else FormalScalar.unit(1)
            rows.append(tuple(e if jj == j else z for jj in range(len(src))))
        return Mat.from_rows(rows, len(src))

    return ParabolicSheaf.build(chart, summands, matrix)


def jumping_numbers(f: ParabolicSheaf) -> list[Fraction]:
    """Weights -a/n for which E_{(a-1)/n} -> E_{a/n} is not an isomorphism."""
    n = f.kummer.level
    if n is None or f.chart.r != 1:
        raise SheafError("jumping numbers are read off rank one free towers")
    out = []
    for a in range(-n + 1, 1):
        _, m = f.path_matrix((Fraction(a - 1, n),), [0])
        if not is_iso(m):
            out.append(Fraction(-a, n))
    return sorted(out)


def my_euler(d: MYData):
    """chi_MY(E_*(m)) = chi(E(-D)(m)) + sum a_i chi(G_i(m))."""
    base = d.chart.base
    total = euler_sum(base, d.filtration_piece(len(d.weights)))
    negd = pic_neg(d.divisor)
    for i, a in enumerate(d.weights):
        for j in d.graded_piece(i):
            s = d.summands[j]
            total = total + (euler_sum(base, [s]) - euler_sum(base, [pic_add(s, negd)])) * a
    return total


def embed_slice(f: ParabolicSheaf, chart: Chart, i: int, j: int, n: int) -> ParabolicSheaf:
    """Place f in the slice a_i = -j/n of chart, zeros elsewhere."""
    if chart.kummer.level != n:
        raise SheafError("the target chart must be the free tower of level n")
    if i not in chart.zero_flags:
        raise SheafError(f"direction {i} carries a nonzero section; the slice is only defined when it vanishes")
    if not 1 <= j <= n:
        raise SheafError("slice index must satisfy 1 <= j <= n")
    if chart.drop_direction(i) != f.chart:
        raise SheafError("the inner sheaf must live on the chart with direction i removed")
    slice_at = Fraction(-j, n)

    def inner(v: Vec) -> Vec:
        return tuple(x for k, x in enumerate(v) if k != i)

    def point(v: Vec) -> Vec | None:
        """Where the rep's class meets the slice, or None."""
        if (v[i] - slice_at).denominator != 1:
            return None
        return tuple(slice_at if k == i else x for k, x in enumerate(v))

    def summands(v):
        p = point(v)
        if p is None:
            return []
        tw = chart.pic(sub(v, p))
        return [pic_add(s, tw) for s in f.piece_at(inner(p))]

    def matrix(v, g):
        src = summands(v)
        tgt_v = add(v, chart.kummer.q_gens[g])
        tgt = len(summands(tgt_v))
        if g == i or not src:
            return Mat(tgt, len(src))
        p = point(v)
        ig = g if g < i else g - 1
        _, m = f.path_matrix(inner(p), [ig])
        return Mat(m.nrows, m.ncols, tuple(tuple(lift(e) for e in row) for row in m.rows))

    def lift(e: FormalScalar) -> FormalScalar:
        return FormalScalar(tuple((x[:i] + (0,) + x[i:], c) for x, c in e.terms))

    return ParabolicSheaf.build(chart, summands, matrix)


def tensor_line(f: ParabolicSheaf, c: PicClass) -> ParabolicSheaf:
    c = f.chart.base.check_class(c)
    return ParabolicSheaf(f.chart, f.reps, [[pic_add(s, c) for s in ss] for ss in f.summands], f.transitions)


def direct_sum(f: ParabolicSheaf, g: ParabolicSheaf) -> ParabolicSheaf:
    if f.chart != g.chart:
        raise SheafError("direct sum needs a common chart")

    def summands(v):
        return list(f.piece_at(v)) + list(g.piece_at(v))

    def matrix(v, i):
        return block_diag(f.path_matrix(v, [i])[1], g.path_matrix(v, [i])[1])

    return ParabolicSheaf.build(f.chart, summands, matrix, reps=f.reps)


def restrict(f: ParabolicSheaf, keep: Sequence[Iterable[int]]) -> ParabolicSheaf:
    """The coordinate subquotient on the chosen summands of each class."""
    keep = [sorted(k) for k in keep]
    summands = [[f.summands[c][j] for j in keep[c]] for c in range(len(f.reps))]
    trans = {}
    for c in range(len(f.reps)):
        for i in range(len(f.q_gens)):
            tc, _ = f.target(c, i)
            trans[(c, i)] = f.matrix(c, i).submatrix(keep[tc], keep[c])
    return ParabolicSheaf(f.chart, f.reps, summands, trans)


def shift(f: ParabolicSheaf, s: Sequence) -> ParabolicSheaf:
    """The sheaf v -> E_{v+s} (tensor with the weight s in Q^gp)."""
    s = vec(s)
    if not f.kummer.in_qgp(s):
        raise SheafError("shift must lie in Q^gp")

    def summands(v):
        return f.piece_at(add(v, s))

    def matrix(v, i):
        return f.path_matrix(add(v, s), [i])[1]

    return ParabolicSheaf.build(f.chart, summands, matrix)


def single_node(chart: Chart, v: Sequence, c: PicClass) -> ParabolicSheaf:
    """One line bundle in the class of v (placed at v), zero elsewhere, zero maps."""
    v = vec(v)
    key = chart.kummer.class_key(v)

    def summands(w):
        if chart.kummer.class_key(w) != key:
            return []
        return [pic_add(c, chart.pic(sub(w, v)))]

    def matrix(w, i):
        return Mat(len(summands(add(w, chart.kummer.q_gens[i]))), len(summands(w)))

    return ParabolicSheaf.build(chart, summands, matrix)


# ---------------------------------------------------------------- isomorphism

def is_isomorphic(f: ParabolicSheaf, g: ParabolicSheaf, cap: int = 8) -> bool:
    """Summand bijections per class plus diagonal rescalings intertwining all
    evaluated matrices."""
    if f.chart != g.chart:
        return False
    nclass = len(f.reps)
    if len(g.reps) != nclass:
        return False
    gidx, gmats = [], {}
    for c, v in enumerate(f.reps):
        a = sorted(f.summands[c])
        b = g.piece_at(v)
        if a != sorted(b):
            return False
        if len(b) > cap:
            raise SheafError(f"summand count {len(b)} above the cap {cap}")
        gidx.append(g.class_index(v))
    for c, v in enumerate(f.reps):
        for i in range(len(f.q_gens)):
            gmats[(c, i)] = g.path_matrix(v, [i])[1]

    # candidate bijections: f summand j goes to a g summand of the same class
    options = []
    for c, v in enumerate(f.reps):
        b = g.piece_at(v)
        cand = [[k for k in range(len(b)) if b[k] == s] for s in f.summands[c]]
        options.append(cand)

    edges = [(c, i, f.target(c, i)[0]) for c in range(nclass) for i in range(len(f.q_gens))]
    order = _class_order(f)
    perm: list[tuple[int, ...] | None] = [None] * nclass

    def pattern_ok(c, i, tc) -> bool:
        fm, gm = f.matrix(c, i), gmats[(c, i)]
        pc, pt = perm[c], perm[tc]
        for a in range(fm.nrows):
            for b in range(fm.ncols):
                x, y = fm[a, b], gm[pt[a], pc[b]]
                if x.is_zero() != y.is_zero():
                    return False
                if x.terms and y.ratio_to(x) is None:
                    return False
        return True

    def scalars_ok() -> bool:
        pot: dict[tuple[int, int], Fraction] = {}
        adj: dict[tuple[int, int], list[tuple[tuple[int, int], Fraction]]] = {}
        for c, i, tc in edges:
            fm, gm = f.matrix(c, i), gmats[(c, i)]
            for a, b in fm.nonzero():
                mu = gm[perm[tc][a], perm[c][b]].ratio_to(fm[a, b])
                adj.setdefault((c, b), []).append(((tc, a), mu))
                adj.setdefault((tc, a), []).append(((c, b), 1 / mu))
        for start in adj:
            if start in pot:
                continue
            pot[start] = Fraction(1)
            stack = [start]
            while stack:
                u = stack.pop()
                for w, mu in adj[u]:
                    val = pot[u] * mu
                    if w not in pot:
                        pot[w] = val
                        stack.append(w)
                    elif pot[w] != val:
                        return False
        return True

    def search(pos: int) -> bool:
        if pos == len(order):
            return scalars_ok()
        c = order[pos]
        for p in _bijections(options[c]):
            perm[c] = p
            good = all(pattern_ok(a, i, tc) for a, i, tc in edges
                       if (a == c or tc == c) and perm[a] is not None and perm[tc] is not None)
            if good and search(pos + 1):
                return True
        perm[c] = None
        return False

    return search(0)


def _bijections(cand: list[list[int]]):
    used: set[int] = set()
    chosen: list[int] = []

    def rec(j):
        if j == len(cand):
            yield tuple(chosen)
            return
        for k in cand[j]:
            if k not in used:
                used.add(k)
                chosen.append(k)
                yield from rec(j + 1)
                chosen.pop()
                used.discard(k)

    yield from rec(0)


def _class_order(f: ParabolicSheaf) -> list[int]:
    """Breadth first over the generator graph so constraints bite early."""
    seen, order = set(), []
    for start in range(len(f.reps)):
        if start in seen:
            continue
        queue = [start]
        seen.add(start)
        while queue:
            c = queue.pop(0)
            order.append(c)
            for i in range(len(f.q_gens)):
                tc = f.target(c, i)[0]
                if tc not in seen:
                    seen.add(tc)
                    queue.append(tc)
    return order


def check_injectivity(f: ParabolicSheaf) -> bool:
    """Every evaluated transition matrix has full column rank."""
    for c in range(len(f.reps)):
        for i in range(len(f.q_gens)):
            m = f.matrix(c, i)
            if m.ncols and generic_rank(m) < m.ncols:
                return False
    return True


def modified_rank_poly(f: ParabolicSheaf):
    """Sum of Euler polynomials over the stored class pieces (a quick size measure)."""
    return euler_sum(f.chart.base, [s for ss in f.summands for s in ss])


def _show(v) -> str:
    from .exact import fmt

    return "(" + ", ".join(fmt(x) for x in v) + ")"
