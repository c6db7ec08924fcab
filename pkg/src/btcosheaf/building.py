"""Lattice-class model of the building of GL_d over a p-adic field.

A vertex is the homothety class of a full-rank lattice spanned (over the
p-local integers) by the columns of a d x d matrix with entries in Z[1/p].
Its canonical representative is the column Hermite normal form: lower
triangular, diagonal entries p^a, entries left of the diagonal reduced to
integers in [0, p^a), scaled so the lattice lies in the standard lattice
but not in p times it.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .apartment import Apartment, BudgetExceeded, SubComplex


class BuildingError(ValueError):
    pass


class Unsupported(BuildingError):
    pass


def valuation(x, p: int) -> float | int:
    """p-adic valuation of a rational; +inf for 0."""
    x = Fraction(x)
    if x == 0:
        return float("inf")
    v = 0
    n, d = x.numerator, x.denominator
    while n % p == 0:
        n //= p
        v += 1
    while d % p == 0:
        d //= p
        v -= 1
    return v


def unit_part(x: Fraction, p: int) -> Fraction:
    return Fraction(x) / Fraction(p) ** valuation(x, p)


def residue(x: Fraction, p: int, e: int) -> int:
    """The integer in [0, p^e) congruent to a p-local integer x modulo p^e."""
    x = Fraction(x)
    mod = p ** e
    if valuation(x, p) < 0:
        raise BuildingError(f"{x} is not p-integral")
    return (x.numerator * pow(x.denominator, -1, mod)) % mod if mod > 1 else 0


@dataclass(frozen=True)
class PAdicScalar:
    """numerator * p^exponent with p not dividing numerator (or numerator 0)."""

    numerator: int
    p_exponent: int
    p: int

    @classmethod
    def make(cls, numerator: int, p_exponent: int, p: int) -> "PAdicScalar":
        if numerator == 0:
            return cls(0, 0, p)
        while numerator % p == 0:
            numerator //= p
            p_exponent += 1
        return cls(numerator, p_exponent, p)

    @classmethod
    def from_fraction(cls, x, p: int) -> "PAdicScalar":
        x = Fraction(x)
        if x == 0:
            return cls(0, 0, p)
        v = valuation(x, p)
        u = x / Fraction(p) ** v
        if u.denominator != 1:
            raise BuildingError(f"{x} is not in Z[1/p]")
        return cls(u.numerator, v, p)

    @classmethod
    def parse(cls, text: str, p: int) -> "PAdicScalar":
        """Parse "num", "num*p^e" or "p^e" ("p" is literal)."""
        t = text.replace(" ", "")
        m = re.fullmatch(r"(-?\d+)(?:\*p\^(-?\d+))?", t)
        if m:
            return cls.make(int(m.group(1)), int(m.group(2) or 0), p)
        m = re.fullmatch(r"(-?)p\^(-?\d+)", t)
        if m:
            return cls.make(-1 if m.group(1) else 1, int(m.group(2)), p)
        raise BuildingError(f"cannot parse scalar {text!r}")

    def value(self) -> Fraction:
        return Fraction(self.numerator) * Fraction(self.p) ** self.p_exponent

    def valuation(self):
        return float("inf") if self.numerator == 0 else self.p_exponent

    def __str__(self) -> str:
        if self.numerator == 0:
            return "0"
        return f"{self.numerator}*p^{self.p_exponent}"


Matrix = tuple[tuple[Fraction, ...], ...]


def to_fraction_matrix(m, p: int | None = None) -> list[list[Fraction]]:
    rows = []
    for row in m:
        r = []
        for v in row:
            if isinstance(v, PAdicScalar):
                r.append(v.value())
            elif isinstance(v, str):
                if p is None:
                    raise BuildingError("string entries need p")
                r.append(PAdicScalar.parse(v, p).value())
            else:
                r.append(Fraction(v))
        rows.append(r)
    return rows


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> list[list[Fraction]]:
    n, k, m = len(a), len(b), len(b[0])
    return [[sum((Fraction(a[i][t]) * b[t][j] for t in range(k)), Fraction(0)) for j in range(m)]
            for i in range(n)]


def det(m: Sequence[Sequence]) -> Fraction:
    a = [[Fraction(x) for x in row] for row in m]
    n = len(a)
    out = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            out = -out
        out *= a[c][c]
        for r in range(c + 1, n):
            f = a[r][c] / a[c][c]
            if f:
                for j in range(c, n):
                    a[r][j] -= f * a[c][j]
    return out


def mat_inverse(m: Sequence[Sequence]) -> list[list[Fraction]]:
    n = len(m)
    a = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(m)]
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c] != 0), None)
        if piv is None:
            raise BuildingError("singular matrix")
        a[c], a[piv] = a[piv], a[c]
        inv = 1 / a[c][c]
        a[c] = [v * inv for v in a[c]]
        for r in range(n):
            if r != c and a[r][c] != 0:
                f = a[r][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return [row[n:] for row in a]


def hermite_normal_form(m: Sequence[Sequence], p: int) -> tuple[tuple[int, ...], ...]:
    """Canonical column HNF of the lattice spanned by the columns of m.

    m is d x n with n >= d and rank d.  The result is the canonical
    integer matrix of the homothety class.
    """
    a = [[Fraction(x) for x in row] for row in m]
    d = len(a)
    n = len(a[0])
    vals = [valuation(x, p) for row in a for x in row if x != 0]
    if not vals:
        raise BuildingError("zero matrix")
    shift = min(vals)
    scale = Fraction(p) ** (-shift)
    a = [[x * scale for x in row] for row in a]
    cols = [[a[i][j] for i in range(d)] for j in range(n)]
    diag_exp = []
    for i in range(d):
        best = None
        for j in range(i, len(cols)):
            v = valuation(cols[j][i], p)
            if v != float("inf") and (best is None or v < best[0]):
                best = (v, j)
        if best is None:
            raise BuildingError("matrix does not have full rank")
        v, j = best
        cols[i], cols[j] = cols[j], cols[i]
        u = unit_part(cols[i][i], p)
        cols[i] = [x / u for x in cols[i]]
        piv = cols[i][i]
        for j in range(i + 1, len(cols)):
            f = cols[j][i] / piv
            if f:
                cols[j] = [x - f * y for x, y in zip(cols[j], cols[i])]
        diag_exp.append(v)
    cols = cols[:d]
    for i in range(d):
        pa = p ** diag_exp[i]
        for j in range(i):
            x = cols[j][i]
            r = residue(x, p, diag_exp[i])
            q = (x - r) / pa
            if q:
                cols[j] = [c - q * ci for c, ci in zip(cols[j], cols[i])]
    out = []
    for i in range(d):
        row = []
        for j in range(d):
            x = cols[j][i]
            if x.denominator != 1:
                raise BuildingError("HNF produced a non-integer entry")
            row.append(int(x))
        out.append(tuple(row))
    return tuple(out)


@dataclass(frozen=True, order=True)
class LatticeVertex:
    """A vertex [Λ] stored by its canonical HNF basis."""

    p: int
    basis: tuple[tuple[int, ...], ...]

    @property
    def d(self) -> int:
        return len(self.basis)

    def matrix(self) -> list[list[Fraction]]:
        return [[Fraction(x) for x in row] for row in self.basis]

    def diagonal_exponents(self) -> tuple[int, ...]:
        return tuple(valuation(self.basis[i][i], self.p) for i in range(self.d))

    def to_json(self) -> dict:
        return {"p": self.p, "basis": [list(r) for r in self.basis]}

    def __repr__(self) -> str:
        return f"LatticeVertex(p={self.p}, basis={self.basis})"


def canonical_vertex(m, p: int) -> LatticeVertex:
    return LatticeVertex(p, hermite_normal_form(to_fraction_matrix(m, p), p))


def standard_vertex(d: int, p: int) -> LatticeVertex:
    return canonical_vertex([[int(i == j) for j in range(d)] for i in range(d)], p)


def smith_exponents(m: Sequence[Sequence], p: int) -> list[int]:
    """Elementary divisor exponents (sorted) of a nonsingular matrix over the p-local integers."""
    return smith_form(m, p)[1]


def smith_form(m: Sequence[Sequence], p: int):
    """Return (U, exps, V) with m = U diag(p^exps) V, U and V p-locally invertible.

    Exponents are nondecreasing.  Entries of U and V are rationals with
    denominators prime to p.
    """
    a = [[Fraction(x) for x in row] for row in m]
    n = len(a)
    left = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]   # tracks U^{-1}
    right = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]  # tracks V^{-1}
    exps = []
    for k in range(n):
        best = None
        for i in range(k, n):
            for j in range(k, n):
                v = valuation(a[i][j], p)
                if v != float("inf") and (best is None or v < best[0]):
                    best = (v, i, j)
        if best is None:
            raise BuildingError("singular matrix")
        v, i, j = best
        a[k], a[i] = a[i], a[k]
        left[k], left[i] = left[i], left[k]
        for row in a:
            row[k], row[j] = row[j], row[k]
        for row in right:
            row[k], row[j] = row[j], row[k]
        piv = a[k][k]
        for r in range(k + 1, n):
            f = a[r][k] / piv
            if f:
                a[r] = [x - f * y for x, y in zip(a[r], a[k])]
                left[r] = [x - f * y for x, y in zip(left[r], left[k])]
        for c in range(k + 1, n):
            f = a[k][c] / piv
            if f:
                for row in a:
                    row[c] -= f * row[k]
                for row in right:
                    row[c] -= f * row[k]
        u = unit_part(piv, p)
        # absorb the unit into the right transform: column k scaled by 1/u
        for row in a:
            row[k] /= u
        for row in right:
            row[k] /= u
        exps.append(v)
    # now left * m * right = diag(p^exps)
    U = mat_inverse(left)
    V = mat_inverse(right)
    return U, exps, V


def relative_exponents(v: LatticeVertex, w: LatticeVertex) -> list[int]:
    """Elementary divisor exponents of Λ_w relative to Λ_v, shifted to start at 0."""
    rel = matmul(mat_inverse(v.matrix()), w.matrix())
    e = smith_exponents(rel, v.p)
    return [x - e[0] for x in e]


def distance(v: LatticeVertex, w: LatticeVertex) -> int:
    """Combinatorial distance in the 1-skeleton (spread of relative exponents)."""
    e = relative_exponents(v, w)
    return e[-1] - e[0]


def adjacent(v: LatticeVertex, w: LatticeVertex) -> bool:
    return distance(v, w) <= 1


def act_vertex(g, v: LatticeVertex) -> LatticeVertex:
    return canonical_vertex(matmul(to_fraction_matrix(g, v.p), v.matrix()), v.p)


def act(g, s):
    """Action of an invertible matrix on a vertex or on a simplex (frozenset)."""
    if isinstance(s, LatticeVertex):
        return act_vertex(g, s)
    return frozenset(act_vertex(g, v) for v in s)


def is_simplex(vertices: Iterable[LatticeVertex]) -> bool:
    vs = list(vertices)
    return bool(vs) and all(adjacent(a, b) for a, b in itertools.combinations(vs, 2))


def _subspaces(d: int, p: int) -> list[list[tuple[int, ...]]]:
    """Bases (in RREF) of all proper nonzero subspaces of F_p^d."""
    out = []
    for k in range(1, d):
        for pivots in itertools.combinations(range(d), k):
            free_slots = []
            for r, pc in enumerate(pivots):
                for c in range(pc + 1, d):
                    if c not in pivots:
                        free_slots.append((r, c))
            for vals in itertools.product(range(p), repeat=len(free_slots)):
                rows = [[0] * d for _ in range(k)]
                for r, pc in enumerate(pivots):
                    rows[r][pc] = 1
                for (r, c), x in zip(free_slots, vals):
                    rows[r][c] = x
                out.append([tuple(r) for r in rows])
    return out


_SUBSPACE_CACHE: dict = {}


def neighbors(v: LatticeVertex) -> list[LatticeVertex]:
    """Vertices adjacent to v and different from it: lattices strictly between pΛ and Λ."""
    d, p = v.d, v.p
    key = (d, p)
    if key not in _SUBSPACE_CACHE:
        _SUBSPACE_CACHE[key] = _subspaces(d, p)
    B = v.matrix()
    pB = [[p * x for x in row] for row in B]
    out = set()
    for basis in _SUBSPACE_CACHE[key]:
        cols = []
        for vec in basis:
            cols.append([sum(B[i][t] * vec[t] for t in range(d)) for i in range(d)])
        gens = [[cols[c][i] for c in range(len(cols))] + pB[i] for i in range(d)]
        out.add(canonical_vertex(gens, p))
    return sorted(out)


@dataclass(frozen=True)
class BuildingComplex:
    """A finite flag subcomplex of the building: simplices as frozensets of vertices."""

    simplices: frozenset

    def vertices(self) -> list[LatticeVertex]:
        vs = set()
        for s in self.simplices:
            vs.update(s)
        return sorted(vs)

    def __len__(self):
        return len(self.simplices)

    def __contains__(self, s):
        return s in self.simplices


def flag_complex(vertices: Iterable[LatticeVertex]) -> BuildingComplex:
    vs = sorted(set(vertices))
    adj = {v: set() for v in vs}
    for a, b in itertools.combinations(vs, 2):
        if adjacent(a, b):
            adj[a].add(b)
            adj[b].add(a)
    out = set()

    def extend(cur, cands):
        out.add(frozenset(cur))
        for i, w in enumerate(cands):
            extend(cur + [w], [u for u in cands[i + 1:] if u in adj[w]])

    for v in vs:
        extend([v], sorted(u for u in adj[v] if u > v))
    return BuildingComplex(frozenset(out))


def ball(center: LatticeVertex, radius: int, budget: int = 100_000) -> BuildingComplex:
    """All simplices whose vertices are within the given distance of center."""
    if radius < 0:
        raise BuildingError("radius must be nonnegative")
    seen = {center}
    frontier = [center]
    for _ in range(radius):
        nxt = set()
        for v in frontier:
            for w in neighbors(v):
                if w not in seen:
                    nxt.add(w)
        seen |= nxt
        if len(seen) > budget:
            raise BudgetExceeded(f"ball exceeds {budget} vertices")
        frontier = sorted(nxt)
    return flag_complex(seen)


def standard_apartment_embed(n: Sequence[int], p: int) -> LatticeVertex:
    d = len(n)
    return canonical_vertex([[Fraction(p) ** n[i] if i == j else 0 for j in range(d)] for i in range(d)], p)


def apartment_coords(v: LatticeVertex) -> tuple[int, ...] | None:
    """Canonical apartment coordinates if v lies in the standard apartment, else None."""
    d = v.d
    for i in range(d):
        for j in range(d):
            if i != j and v.basis[i][j] != 0:
                return None
    e = v.diagonal_exponents()
    return tuple(x - e[-1] for x in e)


def apartment_vertex_to_building(x: Sequence[int], p: int) -> LatticeVertex:
    return standard_apartment_embed(x, p)


def common_apartment(v: LatticeVertex, w: LatticeVertex):
    """A basis diagonalizing both lattices, with apartment coordinates of v and w.

    With M = B_v^{-1} B_w = U D V (Smith form), the basis B_v U spans Λ_v and
    B_v U D spans Λ_w, so in that basis v has coordinates 0 and w has the
    Smith exponents, listed in nonincreasing order.
    """
    if v.d != w.d or v.p != w.p:
        raise BuildingError("vertices from different buildings")
    rel = matmul(mat_inverse(v.matrix()), w.matrix())
    U, exps, _ = smith_form(rel, v.p)
    # reverse the Smith order so that w lands in the dominant chamber
    basis = [row[::-1] for row in matmul(v.matrix(), U)]
    exps = exps[::-1]
    cv = tuple([0] * v.d)
    cw = tuple(x - exps[-1] for x in exps)
    return basis, cv, cw


def chart_vertex(basis: Sequence[Sequence], coords: Sequence[int], p: int) -> LatticeVertex:
    """The vertex with coordinates ``coords`` in the apartment of ``basis``."""
    d = len(coords)
    diag = [[Fraction(p) ** coords[i] if i == j else Fraction(0) for j in range(d)] for i in range(d)]
    return canonical_vertex(matmul(basis, diag), p)


def building_hull_vertices(v: LatticeVertex, w: LatticeVertex) -> list[LatticeVertex]:
    """Vertices of the hull of two vertices, computed in a common apartment."""
    basis, cv, cw = common_apartment(v, w)
    A = Apartment(v.d)
    return sorted(chart_vertex(basis, c, v.p) for c in A.hull_vertices([cv], [cw]))


def fixed_subcomplex(generators, region: BuildingComplex) -> BuildingComplex:
    """Simplices of region all of whose vertices are fixed by every generator."""
    fixed = {}
    for v in region.vertices():
        fixed[v] = all(act_vertex(g, v) == v for g in generators)
    return BuildingComplex(frozenset(s for s in region.simplices if all(fixed[v] for v in s)))


def tree_retraction(chamber: frozenset, s):
    """Retraction of a tree (d = 2) onto the standard apartment, centered at an edge.

    chamber is an edge of the standard apartment.  A vertex at distance k
    from its nearer chamber vertex c is sent to the apartment vertex at
    distance k from c on the side away from the other chamber vertex.
    Returns apartment coordinates (a vertex) or a frozenset of them.
    """
    verts = sorted(chamber)
    if len(verts) != 2:
        raise BuildingError("chamber must be an edge")
    if verts[0].d != 2:
        raise Unsupported("tree retraction exists only for d = 2")
    ca = [apartment_coords(c) for c in verts]
    if None in ca:
        raise BuildingError("chamber must lie in the standard apartment")

    def one(v: LatticeVertex):
        d0, d1 = distance(v, verts[0]), distance(v, verts[1])
        if d0 <= d1:
            c, other = ca[0], ca[1]
            k = d0
        else:
            c, other = ca[1], ca[0]
            k = d1
        step = c[0] - other[0]
        return (c[0] + k * step, 0)

    if isinstance(s, LatticeVertex):
        return one(s)
    return frozenset(one(v) for v in s)


def ball_apartment_subcomplex(coords: Iterable[Sequence[int]], d: int) -> SubComplex:
    A = Apartment(d)
    return A.induced([A.vertex(c) for c in coords])
