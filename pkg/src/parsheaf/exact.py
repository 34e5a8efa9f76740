"""Exact rational helpers: parsing, formatting, small dense linear algebra."""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Iterable, Sequence

Vec = tuple[Fraction, ...]


def frac(x) -> Fraction:
    """Parse an int, Fraction or "a/b" string into a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot read {x!r} as an exact rational")


def fmt(q: Fraction) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def vec(xs: Iterable) -> Vec:
    return tuple(frac(x) for x in xs)


def zero(n: int) -> Vec:
    return (Fraction(0),) * n


def add(u: Sequence[Fraction], v: Sequence[Fraction]) -> Vec:
    return tuple(a + b for a, b in zip(u, v, strict=True))


def sub(u: Sequence[Fraction], v: Sequence[Fraction]) -> Vec:
    return tuple(a - b for a, b in zip(u, v, strict=True))


def scale(c, v: Sequence[Fraction]) -> Vec:
    c = frac(c)
    return tuple(c * a for a in v)


def dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    return sum((a * b for a, b in zip(u, v, strict=True)), Fraction(0))


def is_integral(v: Sequence[Fraction]) -> bool:
    return all(Fraction(a).denominator == 1 for a in v)


def denominator(vs: Iterable[Sequence[Fraction]]) -> int:
    d = 1
    for v in vs:
        for a in v:
            d = lcm(d, Fraction(a).denominator)
    return d


def mat_vec(m: Sequence[Sequence[Fraction]], v: Sequence[Fraction]) -> Vec:
    return tuple(dot(row, v) for row in m)


def rref(rows: Sequence[Sequence[Fraction]], ncols: int) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form; returns the nonzero rows and pivot columns."""
    m = [[Fraction(x) for x in r] for r in rows]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def rank(vectors: Sequence[Sequence[Fraction]]) -> int:
    if not vectors:
        return 0
    return len(rref(vectors, len(vectors[0]))[1])


def solve(columns: Sequence[Sequence[Fraction]], b: Sequence[Fraction]) -> Vec | None:
    """Some x with sum_j x_j columns[j] == b, or None if inconsistent."""
    n = len(columns)
    dim = len(b)
    rows = [[Fraction(columns[j][i]) for j in range(n)] + [Fraction(b[i])] for i in range(dim)]
    red, piv = rref(rows, n + 1)
    if n in piv:
        return None
    x = [Fraction(0)] * n
    for row, c in zip(red, piv):
        x[c] = row[n]
    return tuple(x)


class QuotientSpace:
    """The quotient of F^dim by the span of a list of relation vectors.

    Reduction subtracts pivot components, which gives a canonical
    representative of every coset.
    """

    def __init__(self, dim: int, relations: Sequence[Sequence[Fraction]]):
        self.dim = dim
        self._rows, self._pivots = rref(relations, dim) if relations else ([], [])

    @property
    def quotient_dim(self) -> int:
        return self.dim - len(self._pivots)

    def reduce(self, v: Sequence[Fraction]) -> list[Fraction]:
        v = [Fraction(x) for x in v]
        for row, c in zip(self._rows, self._pivots):
            if v[c] != 0:
                f = v[c]
                v = [a - f * b for a, b in zip(v, row)]
        return v

    def is_zero(self, v: Sequence[Fraction]) -> bool:
        return not any(self.reduce(v))
