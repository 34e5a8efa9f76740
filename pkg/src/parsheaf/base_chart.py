"""Base geometries with closed-form Euler characteristics, Hilbert
polynomials in one variable m, and charts sending monoid elements to line
bundles with a zero/nonzero distinguished section.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from math import factorial
from typing import Iterable, Sequence

from .exact import Vec, fmt, frac, is_integral, vec
from .monoid_lattice import KummerExtension, decompose

PicClass = tuple[int, ...]

KINDS = ("log_point", "P1", "P1xP1", "curve")


@dataclass(frozen=True)
class BaseGeometry:
    kind: str
    genus: int = 0
    polarization_degree: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown base kind {self.kind!r}")
        if self.kind == "curve":
            if self.genus < 0:
                raise ValueError("genus must be nonnegative")
            if self.polarization_degree < 1:
                raise ValueError("polarization degree must be at least 1")

    @classmethod
    def log_point(cls) -> "BaseGeometry":
        return cls("log_point")

    @classmethod
    def p1(cls) -> "BaseGeometry":
        return cls("P1")

    @classmethod
    def p1xp1(cls) -> "BaseGeometry":
        return cls("P1xP1")

    @classmethod
    def curve(cls, genus: int = 0, h: int = 1) -> "BaseGeometry":
        return cls("curve", genus, h)

    @property
    def dimension(self) -> int:
        return {"log_point": 0, "P1": 1, "curve": 1, "P1xP1": 2}[self.kind]

    @property
    def pic_rank(self) -> int:
        return {"log_point": 0, "P1": 1, "curve": 1, "P1xP1": 2}[self.kind]

    @property
    def polarization(self) -> PicClass:
        return {"log_point": (), "P1": (1,), "curve": (1,), "P1xP1": (1, 1)}[self.kind]

    def check_class(self, c: Sequence[int]) -> PicClass:
        c = tuple(c)
        if len(c) != self.pic_rank or not all(isinstance(a, int) for a in c):
            raise ValueError(f"{c} is not a line bundle class on {self.kind}")
        return c


def pic_add(*cs: PicClass) -> PicClass:
    return tuple(map(sum, zip(*cs, strict=True))) if cs else ()


def pic_neg(c: PicClass) -> PicClass:
    return tuple(-a for a in c)


# ---------------------------------------------------------------- polynomials

@dataclass(frozen=True)
class HilbertPoly:
    """Polynomial in m with exact coefficients, constant term first."""

    coeffs: tuple[Fraction, ...] = ()

    def __post_init__(self):
        cs = [frac(c) for c in self.coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    @classmethod
    def of(cls, *coeffs) -> "HilbertPoly":
        return cls(tuple(coeffs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def leading(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def coefficient(self, k: int) -> Fraction:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else Fraction(0)

    def __add__(self, other: "HilbertPoly") -> "HilbertPoly":
        n = max(len(self.coeffs), len(other.coeffs))
        return HilbertPoly(tuple(self.coefficient(k) + other.coefficient(k) for k in range(n)))

    def __neg__(self) -> "HilbertPoly":
        return HilbertPoly(tuple(-c for c in self.coeffs))

    def __sub__(self, other: "HilbertPoly") -> "HilbertPoly":
        return self + (-other)

    def __mul__(self, c) -> "HilbertPoly":
        if isinstance(c, HilbertPoly):
            out = [Fraction(0)] * max(0, len(self.coeffs) + len(c.coeffs) - 1)
            for i, a in enumerate(self.coeffs):
                for j, b in enumerate(c.coeffs):
                    out[i + j] += a * b
            return HilbertPoly(tuple(out))
        c = frac(c)
        return HilbertPoly(tuple(c * a for a in self.coeffs))

    __rmul__ = __mul__

    def __call__(self, m) -> Fraction:
        m = frac(m)
        return sum((c * m**k for k, c in enumerate(self.coeffs)), Fraction(0))

    def shift(self, s: int) -> "HilbertPoly":
        """The polynomial m -> self(m + s)."""
        out = HilbertPoly()
        base = HilbertPoly.of(s, 1)
        power = HilbertPoly.of(1)
        for c in self.coeffs:
            out = out + power * c
            power = power * base
        return out

    def __lt__(self, other):
        return poly_compare(self, other) < 0

    def __le__(self, other):
        return poly_compare(self, other) <= 0

    def __gt__(self, other):
        return poly_compare(self, other) > 0

    def __ge__(self, other):
        return poly_compare(self, other) >= 0

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        terms = []
        for k in range(self.degree, -1, -1):
            c = self.coeffs[k]
            if c == 0:
                continue
            mag = abs(c)
            var = "" if k == 0 else ("m" if k == 1 else f"m^{k}")
            body = fmt(mag) if (mag != 1 or k == 0) else ""
            if body and var:
                body += " "
            piece = body + var
            if not terms:
                terms.append(piece if c > 0 else "-" + piece)
            else:
                terms.append(("+ " if c > 0 else "- ") + piece)
        return " ".join(terms)

    def to_json(self) -> dict:
        """Coefficients from the constant term up, plus a readable form."""
        return {"coefficients": [fmt(c) for c in self.coeffs], "text": str(self)}

    @classmethod
    def from_json(cls, doc: dict) -> "HilbertPoly":
        return cls(tuple(frac(c) for c in doc["coefficients"]))


def poly_compare(p: HilbertPoly, q: HilbertPoly) -> int:
    """-1, 0 or 1 by comparing coefficients from the top degree down."""
    n = max(len(p.coeffs), len(q.coeffs))
    for k in range(n - 1, -1, -1):
        a, b = p.coefficient(k), q.coefficient(k)
        if a != b:
            return -1 if a < b else 1
    return 0


def multiplicity(p: HilbertPoly, d: int) -> Fraction:
    """alpha^d: d! times the coefficient of m^d."""
    return factorial(d) * p.coefficient(d)


def reduce_poly(p: HilbertPoly, normalization: str = "factorial") -> HilbertPoly:
    """Divide p by d! times its leading coefficient (leading term m^d/d!).

    normalization="monic" divides by the leading coefficient alone, so the
    result is monic; the two differ by the constant d! and give the same
    stability verdicts.
    """
    if p.is_zero():
        raise ValueError("zero sheaf has no slope")
    if normalization == "factorial":
        return p * (1 / multiplicity(p, p.degree))
    if normalization == "monic":
        return p * (1 / p.leading)
    raise ValueError(f"unknown normalization {normalization!r}")


@lru_cache(maxsize=None)
def euler_poly(base: BaseGeometry, c: PicClass) -> HilbertPoly:
    """m -> chi(L(m)) for a line bundle L of class c."""
    c = base.check_class(c)
    if base.kind == "log_point":
        return HilbertPoly.of(1)
    if base.kind == "P1":
        return HilbertPoly.of(c[0] + 1, 1)
    if base.kind == "P1xP1":
        a, b = c
        return HilbertPoly.of(a + 1, 1) * HilbertPoly.of(b + 1, 1)
    h, g = base.polarization_degree, base.genus
    return HilbertPoly.of(c[0] + 1 - g, h)


def euler_sum(base: BaseGeometry, classes: Iterable[PicClass]) -> HilbertPoly:
    out = HilbertPoly()
    for c in classes:
        out = out + euler_poly(base, c)
    return out


# ---------------------------------------------------------------- charts

class ChartError(ValueError):
    pass


class Chart:
    """A Kummer extension P in Q on a base, with P^gp -> Pic and section flags.

    pic_map has one row per Pic coordinate and one column per ambient
    coordinate. zero_flags index P's indecomposables in their canonical order.
    """

    def __init__(self, kummer: KummerExtension, base: BaseGeometry, pic_map: Sequence[Sequence[int]],
                 zero_flags: Iterable[int] = ()):
        self.kummer = kummer
        self.base = base
        self.pic_map = tuple(tuple(int(x) for x in row) for row in pic_map)
        self.zero_flags = frozenset(int(i) for i in zero_flags)
        if len(self.pic_map) != base.pic_rank:
            raise ChartError(f"pic_map needs {base.pic_rank} rows on {base.kind}")
        if any(len(row) != kummer.r for row in self.pic_map):
            raise ChartError(f"pic_map rows need {kummer.r} entries")
        n = len(kummer.p_gens)
        if any(not 0 <= i < n for i in self.zero_flags):
            raise ChartError("zero section index out of range")
        diag = self.relation_diagnostics()
        if diag:
            raise ChartError("; ".join(diag))

    def __eq__(self, other):
        return isinstance(other, Chart) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def _key(self):
        return (self.kummer, self.base, self.pic_map, self.zero_flags)

    def __repr__(self):
        return f"Chart({self.kummer!r}, {self.base}, pic_map={self.pic_map}, zero_flags={sorted(self.zero_flags)})"

    @property
    def r(self) -> int:
        return self.kummer.r

    def with_kummer(self, kummer: KummerExtension) -> "Chart":
        if kummer.p.generators != self.kummer.p.generators:
            raise ChartError("the new extension must keep the same P")
        return Chart(kummer, self.base, self.pic_map, self.zero_flags)

    def pic(self, v: Sequence) -> PicClass:
        """Class of L_v for v in P^gp."""
        v = vec(v)
        if not is_integral(v):
            raise ChartError(f"{v} is not in the integer lattice")
        return tuple(int(sum(a * x for a, x in zip(row, v))) for row in self.pic_map)

    def p_exponents(self, x: Sequence) -> tuple[int, ...]:
        """A decomposition of x in P over the indecomposables."""
        sol = decompose(self.kummer.p, x)
        if sol is None:
            raise ChartError(f"{tuple(x)} is not an element of P")
        return sol

    @cached_property
    def _zero_cache(self) -> dict:
        return {}

    def section_is_zero(self, x: Sequence) -> bool:
        """Whether the distinguished section of L_x, x in P, vanishes."""
        x = vec(x)
        cache = self._zero_cache
        if x not in cache:
            exps = self.p_exponents(x)
            cache[x] = any(e and i in self.zero_flags for i, e in enumerate(exps))
        return cache[x]

    def relation_diagnostics(self, max_degree: int | None = None) -> list[str]:
        """Relations between sums of indecomposables where exactly one side
        contains a zero-flagged symbol."""
        gens = self.kummer.p_gens
        n = len(gens)
        if not self.zero_flags or not n:
            return []
        max_degree = max_degree or max(2, n)
        sums: dict[Vec, list[tuple[int, ...]]] = {}
        for deg in range(1, max_degree + 1):
            for combo in itertools.combinations_with_replacement(range(n), deg):
                e = tuple(combo.count(i) for i in range(n))
                v = tuple(sum(e[i] * gens[i][k] for i in range(n)) for k in range(self.r))
                sums.setdefault(v, []).append(e)
        out = []
        for v, exps in sums.items():
            flags = {any(e[i] for i in self.zero_flags) for e in exps}
            if len(flags) > 1:
                a = next(e for e in exps if any(e[i] for i in self.zero_flags))
                b = next(e for e in exps if not any(e[i] for i in self.zero_flags))
                out.append(f"zero sections not closed under the relation {_rel(a)} = {_rel(b)}")
                break
        return out

    def drop_direction(self, i: int) -> "Chart":
        """The chart on the stratum where direction i is forgotten (free towers only)."""
        n = self.kummer.level
        if n is None:
            raise ChartError("dropping a direction needs a free tower N^r in (1/n)N^r")
        k = KummerExtension.free(self.r - 1, n)
        pm = [tuple(x for j, x in enumerate(row) if j != i) for row in self.pic_map]
        zf = [j if j < i else j - 1 for j in self.zero_flags if j != i]
        return Chart(k, self.base, pm, zf)

    def at_level(self, n: int) -> "Chart":
        """Same P, base and flags over the free extension (1/n)N^r."""
        if self.kummer.level is None:
            raise ChartError("levels only make sense over a free tower")
        return self.with_kummer(KummerExtension.free(self.r, n))


def _rel(e: tuple[int, ...]) -> str:
    return " + ".join(f"{k}*p{i}" if k > 1 else f"p{i}" for i, k in enumerate(e) if k)


def standard_log_point(r: int = 1, n: int = 1) -> Chart:
    """N^r -> k with every nonzero section zero, over (1/n)N^r."""
    return Chart(KummerExtension.free(r, n), BaseGeometry.log_point(), [], range(r))
