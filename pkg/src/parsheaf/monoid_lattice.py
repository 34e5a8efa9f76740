"""Affine monoids inside Q^r: membership, indecomposables, simplicial
structure, free envelopes and Kummer extensions with their quotient groups.

Vectors are tuples of Fractions. A monoid is given by generators; all
equalities are decided in the ambient lattice.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from math import floor, gcd, lcm, prod
from typing import Iterable, Sequence

from sympy import Matrix
from sympy.matrices.normalforms import hermite_normal_form, invariant_factors

from .exact import Vec, denominator, dot, is_integral, rank, scale, solve, sub, vec, zero


class MonoidError(ValueError):
    pass


@dataclass(frozen=True)
class MonoidPresentation:
    """A finitely generated submonoid of Q^r given by generators.

    Integer generators give a monoid in Z^r; rational generators are used
    for the finer side of a Kummer extension.
    """

    ambient_rank: int
    generators: tuple[Vec, ...]
    relations: tuple = field(default=(), compare=False)

    def __post_init__(self):
        gens = tuple(vec(g) for g in self.generators)
        for g in gens:
            if len(g) != self.ambient_rank:
                raise MonoidError(f"generator {g} has length {len(g)}, expected {self.ambient_rank}")
            if not any(g):
                raise MonoidError("generators must be nonzero")
        object.__setattr__(self, "generators", gens)

    @classmethod
    def of(cls, generators: Iterable[Sequence], ambient_rank: int | None = None) -> "MonoidPresentation":
        gens = [vec(g) for g in generators]
        if ambient_rank is None:
            if not gens:
                raise MonoidError("ambient rank needed for an empty generator list")
            ambient_rank = len(gens[0])
        return cls(ambient_rank, tuple(gens))

    @classmethod
    def free(cls, r: int, n: int = 1) -> "MonoidPresentation":
        """(1/n)N^r with its standard generators."""
        gens = [tuple(Fraction(1, n) if i == j else Fraction(0) for j in range(r)) for i in range(r)]
        return cls(r, tuple(gens))

    def scaled(self, c) -> "MonoidPresentation":
        return MonoidPresentation(self.ambient_rank, tuple(scale(c, g) for g in self.generators))

    @property
    def is_integral(self) -> bool:
        return all(is_integral(g) for g in self.generators)


# ---------------------------------------------------------------- functionals

def _positive_functional(gens: tuple[Vec, ...]) -> Vec | None:
    """An integral functional strictly positive on every generator, or None."""
    r = len(gens[0]) if gens else 0
    if not gens:
        return zero(r)
    ones = (Fraction(1),) * r
    if all(dot(ones, g) > 0 for g in gens):
        return ones
    from scipy.optimize import linprog

    a_ub = [[-float(x) for x in g] for g in gens]
    res = linprog(c=[0.0] * r, A_ub=a_ub, b_ub=[-1.0] * len(gens), bounds=[(None, None)] * r, method="highs")
    if res.status != 0:
        return None
    for limit in (10, 100, 10_000, 1_000_000):
        cand = tuple(Fraction(x).limit_denominator(limit) for x in res.x)
        if all(dot(cand, g) > 0 for g in gens):
            d = denominator([cand])
            return scale(d, cand)
    return None


@lru_cache(maxsize=None)
def _functional(gens: tuple[Vec, ...]) -> Vec:
    ell = _positive_functional(gens)
    if ell is None:
        raise MonoidError("monoid is not sharp: no functional is positive on all generators")
    return ell


def is_sharp(p: MonoidPresentation) -> bool:
    return _positive_functional(p.generators) is not None


# ---------------------------------------------------------------- membership

def decompose(p: MonoidPresentation, v: Sequence) -> tuple[int, ...] | None:
    """Coefficients n with sum n_i g_i == v, or None when v is not in p."""
    v = vec(v)
    if len(v) != p.ambient_rank:
        raise MonoidError(f"vector of length {len(v)} in a monoid of ambient rank {p.ambient_rank}")
    return _decompose(p.generators, v)


@lru_cache(maxsize=200_000)
def _decompose(gens: tuple[Vec, ...], v: Vec) -> tuple[int, ...] | None:
    if not any(v):
        return (0,) * len(gens)
    if not gens:
        return None
    ell = _functional(gens)
    height = dot(ell, v)
    if height <= 0:
        return None
    dead: set[Vec] = set()

    # depth first search, generators tried in a fixed order; the height
    # strictly drops at every step so the search terminates
    def search(w: Vec, height: Fraction) -> list[int] | None:
        if not any(w):
            return [0] * len(gens)
        if height <= 0 or w in dead:
            return None
        for i, g in enumerate(gens):
            h = dot(ell, g)
            if h <= height:
                sol = search(sub(w, g), height - h)
                if sol is not None:
                    sol[i] += 1
                    return sol
        dead.add(w)
        return None

    sol = search(v, height)
    return None if sol is None else tuple(sol)


def membership(p: MonoidPresentation, v: Sequence) -> bool:
    return decompose(p, v) is not None


def indecomposables(p: MonoidPresentation) -> list[Vec]:
    """Generators that are not a sum of two nonzero elements.

    Sorted in decreasing lexicographic order, so e_1, ..., e_r come out in
    coordinate order.
    """
    gens = sorted(set(p.generators), reverse=True)
    _functional(tuple(gens))
    q = MonoidPresentation(p.ambient_rank, tuple(gens))
    out = []
    for g in gens:
        if not any(h != g and membership(q, sub(g, h)) for h in gens):
            out.append(g)
    return out


def canonical(p: MonoidPresentation) -> MonoidPresentation:
    """Same monoid, generated by its indecomposables in decreasing lexicographic order."""
    return MonoidPresentation(p.ambient_rank, tuple(indecomposables(p)), p.relations)


# ---------------------------------------------------------------- cones

def in_cone(gens: Sequence[Vec], v: Sequence[Fraction]) -> bool:
    """Exact test for v in the rational cone spanned by gens (Caratheodory)."""
    v = vec(v)
    if not any(v):
        return True
    gens = list(gens)
    r = rank(gens) if gens else 0
    for k in range(1, r + 1):
        for sub_gens in itertools.combinations(gens, k):
            if rank(list(sub_gens)) < k:
                continue
            x = solve(sub_gens, v)
            if x is not None and all(c >= 0 for c in x):
                return True
    return False


def _parallel(u: Vec, v: Vec) -> bool:
    if rank([u, v]) > 1:
        return False
    return dot(u, v) > 0


@dataclass(frozen=True)
class SimplicialStructure:
    is_simplicial: bool
    extremal: tuple[Vec, ...]
    internal: tuple[Vec, ...]


def simplicial_structure(p: MonoidPresentation) -> SimplicialStructure:
    ind = indecomposables(p)
    extremal, internal = [], []
    for g in ind:
        others = [h for h in ind if not _parallel(g, h)]
        (internal if in_cone(others, g) else extremal).append(g)
    rays: list[Vec] = []
    for g in extremal:
        if not any(_parallel(g, h) for h in rays):
            rays.append(g)
    simplicial = rank(rays) == len(rays) if rays else True
    return SimplicialStructure(simplicial, tuple(extremal), tuple(internal))


@dataclass(frozen=True)
class StandardRelation:
    """c * q == sum_i a_i p_i with p_i the extremal indecomposables."""

    c: int
    q: Vec
    coefficients: tuple[int, ...]


def standard_relations(p: MonoidPresentation) -> list[StandardRelation]:
    st = simplicial_structure(p)
    if not st.is_simplicial:
        raise MonoidError("standard relations need a simplicial monoid")
    out = []
    for q in st.internal:
        x = solve(st.extremal, q)
        if x is None:
            raise MonoidError(f"internal indecomposable {q} is outside the span of the extremal rays")
        c = lcm(*(a.denominator for a in x)) if x else 1
        coeffs = tuple(int(a * c) for a in x)
        g = gcd(c, *coeffs)
        out.append(StandardRelation(c // g, q, tuple(a // g for a in coeffs)))
    return out


def envelope_orders(p: MonoidPresentation) -> tuple[int, ...]:
    """The d_i of the free envelope, one per extremal indecomposable."""
    st = simplicial_structure(p)
    rels = standard_relations(p)
    ds = []
    for i in range(len(st.extremal)):
        # b_ij = c_j / gcd(c_j, a_ij), indexed by the relation j
        bs = [rel.c // gcd(rel.c, rel.coefficients[i]) for rel in rels]
        ds.append(lcm(*bs) if bs else 1)
    return tuple(ds)


def free_envelope(p: MonoidPresentation) -> MonoidPresentation:
    """F(P), generated by p_i / d_i over the extremal indecomposables."""
    st = simplicial_structure(p)
    if not st.is_simplicial:
        raise MonoidError("free envelope needs a simplicial monoid")
    ds = envelope_orders(p)
    gens = sorted((scale(Fraction(1, d), g) for g, d in zip(st.extremal, ds)), reverse=True)
    return MonoidPresentation(p.ambient_rank, tuple(gens))


def is_free(p: MonoidPresentation) -> bool:
    ind = indecomposables(p)
    return rank(ind) == len(ind)


# ---------------------------------------------------------------- lattices

class Lattice:
    """A full-rank lattice in Q^r spanned by rational generators."""

    def __init__(self, generators: Sequence[Sequence], ambient_rank: int | None = None):
        gens = [vec(g) for g in generators]
        self.r = ambient_rank if ambient_rank is not None else (len(gens[0]) if gens else 0)
        self.scale = denominator(gens)
        if self.r == 0:
            self.basis: list[list[int]] = []
            return
        ints = [[int(x * self.scale) for x in g] for g in gens]
        if rank(gens) < self.r:
            raise MonoidError("generated group does not have full rank in the ambient lattice")
        h = hermite_normal_form(Matrix(ints).T)
        if h.shape != (self.r, self.r):
            raise MonoidError("unexpected Hermite normal form shape")
        cols = [[int(h[i, j]) for i in range(self.r)] for j in range(self.r)]
        for j, c in enumerate(cols):
            if c[j] <= 0 or any(c[i] for i in range(j + 1, self.r)):
                raise MonoidError("Hermite normal form is not upper triangular")
        self.basis = cols

    def reduce(self, v: Sequence) -> Vec:
        """Canonical representative of v modulo the lattice (coordinates scaled back)."""
        w = [frac_x * self.scale for frac_x in vec(v)]
        for j in range(self.r - 1, -1, -1):
            col = self.basis[j]
            k = floor(w[j] / col[j])
            if k:
                w = [a - k * b for a, b in zip(w, col)]
        return tuple(Fraction(a) / self.scale for a in w)

    def contains(self, v: Sequence) -> bool:
        return not any(self.reduce(v))

    def coordinates(self, v: Sequence) -> tuple[int, ...] | None:
        """Integer coordinates of v in the Hermite basis, or None."""
        w = [x * self.scale for x in vec(v)]
        coords = [0] * self.r
        for j in range(self.r - 1, -1, -1):
            col = self.basis[j]
            k = w[j] / col[j]
            if k.denominator != 1:
                return None
            coords[j] = int(k)
            w = [a - k * b for a, b in zip(w, col)]
        return tuple(coords) if not any(w) else None

    @property
    def basis_vectors(self) -> list[Vec]:
        return [tuple(Fraction(x, self.scale) for x in c) for c in self.basis]


# ---------------------------------------------------------------- Kummer

@dataclass(frozen=True)
class FundamentalWeight:
    index: tuple[int, ...]
    vector: Vec


class KummerExtension:
    """P contained in Q with Q^gp/P^gp finite.

    Generator lists are replaced by indecomposables in decreasing lexicographic order.
    """

    def __init__(self, p: MonoidPresentation, q: MonoidPresentation):
        if p.ambient_rank != q.ambient_rank:
            raise MonoidError("P and Q live in lattices of different rank")
        self.p = canonical(p)
        self.q = canonical(q)
        self.r = p.ambient_rank

    def __eq__(self, other):
        return isinstance(other, KummerExtension) and (self.p.generators, self.q.generators) == (
            other.p.generators,
            other.q.generators,
        )

    def __hash__(self):
        return hash((self.p.generators, self.q.generators))

    def __repr__(self):
        return f"KummerExtension(p={list(self.p.generators)}, q={list(self.q.generators)})"

    @classmethod
    def free(cls, r: int, n: int) -> "KummerExtension":
        return cls(MonoidPresentation.free(r, 1), MonoidPresentation.free(r, n))

    @classmethod
    def root(cls, p: MonoidPresentation, n: int) -> "KummerExtension":
        return cls(p, p.scaled(Fraction(1, n)))

    @property
    def p_gens(self) -> tuple[Vec, ...]:
        return self.p.generators

    @property
    def q_gens(self) -> tuple[Vec, ...]:
        return self.q.generators

    @cached_property
    def p_lattice(self) -> Lattice:
        return Lattice(self.p_gens, self.r)

    @cached_property
    def q_lattice(self) -> Lattice:
        return Lattice(self.q_gens, self.r)

    @cached_property
    def level(self) -> int | None:
        """n when this is N^r inside (1/n)N^r with standard generators."""
        std = MonoidPresentation.free(self.r, 1).generators
        if self.p_gens != std:
            return None
        first = self.q_gens[0][0] if self.r else Fraction(1)  # e_1 / n
        n = 1 / first if first else None
        if n is None or n.denominator != 1:
            return None
        return int(n) if self.q_gens == MonoidPresentation.free(self.r, int(n)).generators else None

    def diagnostics(self) -> list[str]:
        out = []
        if not self.p.is_integral:
            out.append("P must have integer generators")
        for g in self.p_gens:
            if not membership(self.q, g):
                out.append(f"P generator {_show(g)} is not in Q")
        try:
            self.group_order
        except MonoidError as exc:
            return out + [str(exc)]
        # some multiple of g lies in P exactly when g is in the rational cone of P
        for g in self.q_gens:
            if not in_cone(self.p_gens, g):
                out.append(f"no multiple of Q generator {_show(g)} lies in P")
        return out

    def validate(self) -> "KummerExtension":
        diag = self.diagnostics()
        if diag:
            raise MonoidError("; ".join(diag))
        return self

    @cached_property
    def invariant_factors(self) -> tuple[int, ...]:
        if self.r == 0:
            return ()
        basis = self.q_lattice.basis_vectors
        rows = []
        for g in self.p_gens:
            x = solve(basis, g)
            if x is None or not is_integral(x):
                raise MonoidError(f"P generator {_show(g)} is not in Q^gp")
            rows.append([int(a) for a in x])
        facs = [int(a) for a in invariant_factors(Matrix(rows))]
        if len([a for a in facs if a != 0]) < self.r:
            raise MonoidError("Q^gp/P^gp is infinite")
        return tuple(a for a in facs if a > 1)

    @cached_property
    def group_order(self) -> int:
        return prod(self.invariant_factors)

    @cached_property
    def orders(self) -> tuple[int, ...]:
        """d_i, the order of q_i in Q^gp/P^gp."""
        n = self.group_order
        out = []
        for g in self.q_gens:
            d = next(k for k in range(1, n + 1) if self.p_lattice.contains(scale(k, g)))
            out.append(d)
        return tuple(out)

    def in_qgp(self, v: Sequence) -> bool:
        return self.q_lattice.contains(v)

    def in_pgp(self, v: Sequence) -> bool:
        return self.p_lattice.contains(v)

    def class_key(self, v: Sequence) -> Vec:
        return self.p_lattice.reduce(v)

    @cached_property
    def default_reps(self) -> tuple[Vec, ...]:
        """One representative per class of Q^gp/P^gp.

        The tuples 0 <= a_i < d_i are scanned by total then lexicographically
        and -sum a_i q_i is kept for each class seen first. For N^r in
        (1/n)N^r this is the grid in the cube (-1, 0]^r.
        """
        seen: dict[Vec, Vec] = {}
        ranges = [range(d) for d in self.orders]
        for a in sorted(itertools.product(*ranges), key=lambda t: (sum(t), t)):
            v = zero(self.r)
            for ai, g in zip(a, self.q_gens):
                v = sub(v, scale(ai, g))
            key = self.class_key(v)
            if key not in seen:
                seen[key] = v
            if len(seen) == self.group_order:
                break
        if len(seen) != self.group_order:
            raise MonoidError("generator multiples do not cover Q^gp/P^gp")
        return tuple(sorted(seen.values()))

    def fundamental_weights(self) -> list[FundamentalWeight]:
        out = []
        for a in itertools.product(*[range(1, d + 1) for d in self.orders]):
            v = zero(self.r)
            for ai, g in zip(a, self.q_gens):
                v = sub(v, scale(ai, g))
            out.append(FundamentalWeight(tuple(a), v))
        return out


def quotient_orders(k: KummerExtension) -> tuple[tuple[int, ...], dict[Vec, int]]:
    return k.invariant_factors, dict(zip(k.q_gens, k.orders))


def fundamental_weights(k: KummerExtension) -> list[FundamentalWeight]:
    return k.fundamental_weights()


def saturation_check(p: MonoidPresentation, bound: int) -> tuple[bool, Vec | None]:
    """Search [-bound, bound]^r for a hole: v in P^gp and the cone of P but not in P."""
    if bound < 1:
        raise MonoidError("bound must be at least 1")
    gens = indecomposables(p)
    lat = Lattice(gens, p.ambient_rank)
    pts = itertools.product(range(-bound, bound + 1), repeat=p.ambient_rank)
    for v in sorted(pts, key=lambda t: (max(map(abs, t), default=0), t)):
        v = vec(v)
        if lat.contains(v) and in_cone(gens, v) and not membership(p, v):
            return False, v
    return True, None


def _show(v: Sequence[Fraction]) -> str:
    from .exact import fmt

    return "(" + ", ".join(fmt(x) for x in v) + ")"
