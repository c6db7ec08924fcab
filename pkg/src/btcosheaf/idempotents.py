"""Consistent systems of idempotents and their checkers.

Two constructors are provided.  ``diagonal_model`` attaches to every
vertex a 0/1 diagonal matrix built from a list of convex supports.
``group_model`` uses a finite quotient GL_d(Z/p^M) acting on a finite set,
with congruence subgroups U^(r) of the vertices and their averaging
idempotents.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from . import linalg
from .apartment import Apartment, SubComplex, Vertex
from .building import (LatticeVertex, act_vertex, apartment_coords, mat_inverse, matmul,
                       residue, standard_apartment_embed, valuation)
from .linalg import QMatrix
from .report import Report


class IdempotentError(ValueError):
    pass


class NonConvexSupport(IdempotentError):
    pass


class NonCommutingVertices(IdempotentError):
    pass


class NotAdmissible(IdempotentError):
    pass


class ConsistencyFailure(IdempotentError):
    pass


class OutOfValidityRange(IdempotentError):
    pass


class NotASubgroup(IdempotentError):
    pass


class SubgroupBudgetExceeded(RuntimeError):
    pass


DEFAULT_SUBGROUP_BUDGET = 1_000_000

# ---------------------------------------------------------------------------
# finite matrix groups over Z/q

GroupElement = tuple[tuple[int, ...], ...]


def gmul(a: GroupElement, b: GroupElement, q: int) -> GroupElement:
    d = len(a)
    return tuple(tuple(sum(a[i][t] * b[t][j] for t in range(d)) % q for j in range(d)) for i in range(d))


def gidentity(d: int) -> GroupElement:
    return tuple(tuple(int(i == j) for j in range(d)) for i in range(d))


def gdet(a: GroupElement, q: int) -> int:
    d = len(a)
    if d == 1:
        return a[0][0] % q
    if d == 2:
        return (a[0][0] * a[1][1] - a[0][1] * a[1][0]) % q
    total = 0
    for perm in itertools.permutations(range(d)):
        sign = 1
        for i, j in itertools.combinations(range(d), 2):
            if perm[i] > perm[j]:
                sign = -sign
        prod = 1
        for i in range(d):
            prod *= a[i][perm[i]]
        total += sign * prod
    return total % q


def ginverse(a: GroupElement, p: int, q: int) -> GroupElement:
    inv = mat_inverse([[Fraction(x) for x in row] for row in a])
    return tuple(tuple(residue(x, p, _exp(p, q)) for x in row) for row in inv)


def _exp(p: int, q: int) -> int:
    e = 0
    while q > 1:
        q //= p
        e += 1
    return e


def subgroup_closure(generators: Iterable[GroupElement], q: int, d: int,
                     budget: int = DEFAULT_SUBGROUP_BUDGET) -> list[GroupElement]:
    """All products of the generators (a finite group is closed under products)."""
    gens = list(generators)
    one = gidentity(d)
    seen = {one}
    frontier = [one]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = gmul(x, g, q)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
                    if len(seen) > budget:
                        raise SubgroupBudgetExceeded(f"subgroup exceeds {budget} elements")
        frontier = nxt
    return sorted(seen)


def is_closed(elements: Iterable[GroupElement], q: int) -> bool:
    els = set(elements)
    return all(gmul(a, b, q) in els for a in els for b in els)


def product_set(A: Iterable[GroupElement], B: Iterable[GroupElement], q: int) -> frozenset:
    return frozenset(gmul(a, b, q) for a in A for b in B)


class FiniteGroupModel:
    """GL_d(Z/p^M) acting on a finite set X.

    ``space`` is "regular" (X is the group, acted on by left multiplication)
    or "projective" (X is the projective space of primitive vectors modulo
    units).  The module is Q[X] with the permutation action.
    """

    def __init__(self, d: int, p: int, M: int, space: str = "projective"):
        if M < 1:
            raise IdempotentError("precision M must be positive")
        self.d, self.p, self.M = d, p, M
        self.q = p ** M
        self.space = space
        if space == "regular":
            self.points = self._enumerate_group()
        elif space == "projective":
            self.points = self._enumerate_projective()
        else:
            raise IdempotentError(f"unknown space {space!r}")
        self.index = {x: i for i, x in enumerate(self.points)}
        self._perm_cache: dict = {}

    @property
    def module_dim(self) -> int:
        return len(self.points)

    def to_json(self) -> dict:
        return {"group": "GL", "d": self.d, "p": self.p, "M": self.M, "space": self.space}

    def _enumerate_group(self) -> list[GroupElement]:
        q, d, p = self.q, self.d, self.p
        out = []
        for entries in itertools.product(range(q), repeat=d * d):
            g = tuple(tuple(entries[i * d:(i + 1) * d]) for i in range(d))
            if gdet(g, q) % p != 0:
                out.append(g)
        return out

    def _normalize_point(self, v: Sequence[int]) -> tuple[int, ...]:
        q, p = self.q, self.p
        for a in v:
            if a % p != 0:
                inv = pow(a, -1, q)
                return tuple((x * inv) % q for x in v)
        raise IdempotentError("vector is not primitive")

    def _enumerate_projective(self) -> list[tuple[int, ...]]:
        pts = set()
        for v in itertools.product(range(self.q), repeat=self.d):
            if any(a % self.p for a in v):
                pts.add(self._normalize_point(v))
        return sorted(pts)

    def act_point(self, g: GroupElement, x):
        if self.space == "regular":
            return gmul(g, x, self.q)
        d = self.d
        return self._normalize_point([sum(g[i][j] * x[j] for j in range(d)) for i in range(d)])

    def permutation(self, g: GroupElement) -> list[int]:
        if g not in self._perm_cache:
            self._perm_cache[g] = [self.index[self.act_point(g, x)] for x in self.points]
        return self._perm_cache[g]

    def action_matrix(self, g: GroupElement) -> QMatrix:
        return QMatrix.permutation(self.permutation(g))

    def orbits(self, elements: Iterable[GroupElement]) -> list[list[int]]:
        """Orbits of the subgroup on X by union-find over the action table."""
        n = self.module_dim
        parent = list(range(n))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for g in elements:
            perm = self.permutation(g)
            for a in range(n):
                ra, rb = find(a), find(perm[a])
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
        groups: dict[int, list[int]] = {}
        for a in range(n):
            groups.setdefault(find(a), []).append(a)
        return sorted(groups.values())

    def reduce(self, m) -> GroupElement:
        e = self.M
        return tuple(tuple(residue(Fraction(x), self.p, e) for x in row) for row in m)


def averaging_idempotent(elements: Sequence[GroupElement], model: FiniteGroupModel,
                         check_subgroup: bool = True) -> QMatrix:
    """(1/|K|) sum of the action matrices, computed orbit by orbit.

    Since K acts transitively on each orbit O, the average sends every basis
    vector in O to (1/|O|) times the sum of the basis vectors of O.
    """
    if check_subgroup and not is_closed(elements, model.q):
        raise NotASubgroup("elements are not closed under multiplication")
    rows: dict[int, dict[int, Fraction]] = {}
    for orb in model.orbits(elements):
        w = Fraction(1, len(orb))
        for a in orb:
            rows[a] = {b: w for b in orb}
    return QMatrix(model.module_dim, model.module_dim, rows)


def direct_average(elements: Sequence[GroupElement], model: FiniteGroupModel) -> QMatrix:
    """The literal sum (1/|K|) sum_k pi(k)."""
    n = model.module_dim
    acc = QMatrix(n, n)
    for g in elements:
        acc = acc + model.action_matrix(g)
    return acc.scale(Fraction(1, len(elements)))


def congruence_subgroup(v: LatticeVertex, r: int, M: int,
                        budget: int = DEFAULT_SUBGROUP_BUDGET) -> list[GroupElement]:
    """Image of U^(r)_[Λ] = {g : (g - 1)Λ ⊆ P^{r+1}Λ} in GL_d(Z/p^M).

    U^(r) = 1 + p^{r+1} B M_d(O) B^{-1} for Λ = B O^d.  The additive group
    p^{r+1} B M_d(O) B^{-1} is generated by the images of the matrix units;
    they must be integral, which holds when v is within depth r+1 of the
    standard vertex.
    """
    p, d = v.p, v.d
    q = p ** M
    B = v.matrix()
    Binv = mat_inverse(B)
    gens = []
    for a in range(d):
        for b in range(d):
            E = [[Fraction(int(i == a and j == b)) for j in range(d)] for i in range(d)]
            X = matmul(matmul(B, E), Binv)
            X = [[x * p ** (r + 1) for x in row] for row in X]
            if any(valuation(x, p) < 0 for row in X for x in row if x != 0):
                raise OutOfValidityRange(f"U^({r}) of {v.basis} is not integral")
            gens.append(tuple(residue(x, p, M) for row in X for x in row))
    span = {tuple([0] * (d * d))}
    for g in gens:
        new = set()
        for s in span:
            cur = s
            while True:
                new.add(cur)
                cur = tuple((x + y) % q for x, y in zip(cur, g))
                if cur == s:
                    break
            if len(new) > budget:
                raise SubgroupBudgetExceeded(f"subgroup exceeds {budget} elements")
        span = new
    one = gidentity(d)
    out = []
    for s in sorted(span):
        out.append(tuple(tuple((one[i][j] + s[i * d + j]) % q for j in range(d)) for i in range(d)))
    return out


# ---------------------------------------------------------------------------
# idempotent systems


@dataclass
class Symmetry:
    """A declared symmetry: its action on apartment vertices and on the module."""

    label: str
    vertex_map: Callable[[Vertex], Vertex | None]
    module_matrix: QMatrix
    element: object = None

    def map_simplex(self, s: frozenset):
        out = []
        for v in s:
            w = self.vertex_map(v)
            if w is None:
                return None
            out.append(w)
        return frozenset(out)


@dataclass
class IdempotentSystem:
    """Vertex idempotents on a fixed module of dimension ``dim``."""

    apartment: Apartment
    dim: int
    vertex_fn: Callable[[Vertex], QMatrix]
    provenance: str
    domain: SubComplex | None = None
    symmetries: list[Symmetry] = field(default_factory=list)
    info: dict = field(default_factory=dict)
    _cache: dict = field(default_factory=dict, repr=False)
    _scache: dict = field(default_factory=dict, repr=False)

    def e(self, x: Vertex) -> QMatrix:
        if x not in self._cache:
            m = self.vertex_fn(x)
            if m.shape != (self.dim, self.dim):
                raise IdempotentError("vertex idempotent has the wrong shape")
            self._cache[x] = m
        return self._cache[x]

    def defined_at(self, x: Vertex) -> bool:
        if self.domain is not None and x not in self.domain.vertices():
            return self.provenance == "diagonal"
        return True

    def e_simplex(self, s: frozenset) -> QMatrix:
        s = frozenset(s)
        if s not in self._scache:
            self._scache[s] = simplex_idempotent(self, s)
        return self._scache[s]


def simplex_idempotent(E: IdempotentSystem, sigma: frozenset, rng: random.Random | None = None) -> QMatrix:
    """Product of the vertex idempotents of sigma in canonical vertex order.

    The vertex idempotents must commute; the product is compared with one
    shuffled order.
    """
    verts = sorted(sigma)
    mats = [E.e(v) for v in verts]
    for (a, ma), (b, mb) in itertools.combinations(zip(verts, mats), 2):
        if ma @ mb != mb @ ma:
            raise NonCommutingVertices(f"e at {a} and {b} do not commute")
    prod = QMatrix.identity(E.dim)
    for m in mats:
        prod = prod @ m
    if len(mats) > 2:
        rng = rng or random.Random(len(verts))
        order = list(range(len(mats)))
        rng.shuffle(order)
        alt = QMatrix.identity(E.dim)
        for i in order:
            alt = alt @ mats[i]
        if alt != prod:
            raise NonCommutingVertices("product depends on the vertex order")
    return prod


def diagonal_model(sigma: SubComplex, supports: Sequence[SubComplex], check: bool = True) -> IdempotentSystem:
    """e_x = diag(1 if x lies in supports[w] else 0), w indexing the module basis."""
    A = sigma.apartment
    if check:
        for k, C in enumerate(supports):
            if not A.is_convex(C):
                raise NonConvexSupport(f"support {k} is not convex")
    vsets = [set(C.vertices()) for C in supports]

    def fn(x):
        return QMatrix.diagonal([1 if x in vs else 0 for vs in vsets])

    return IdempotentSystem(A, len(supports), fn, "diagonal", domain=sigma,
                            info={"supports": [C.vertices() for C in supports]})


def group_model(model: FiniteGroupModel, sigma: SubComplex, r: int,
                symmetry_elements: Sequence[GroupElement] = (),
                budget: int = DEFAULT_SUBGROUP_BUDGET) -> tuple[IdempotentSystem, dict]:
    """Averages of U^(r) over apartment vertices of sigma (standard apartment of GL_d).

    Returns the system and the dictionary vertex -> subgroup elements.
    """
    A = sigma.apartment
    p, M = model.p, model.M
    K: dict[Vertex, list[GroupElement]] = {}
    for x in sigma.vertices():
        K[x] = congruence_subgroup(standard_apartment_embed(x, p), r, M, budget)

    def fn(x):
        if x not in K:
            K[x] = congruence_subgroup(standard_apartment_embed(x, p), r, M, budget)
        return averaging_idempotent(K[x], model)

    syms = [group_symmetry(model, g, A) for g in symmetry_elements]
    E = IdempotentSystem(A, model.module_dim, fn, "group", domain=sigma, symmetries=syms,
                         info={"model": model.to_json(), "r": r})
    return E, K


def group_symmetry(model: FiniteGroupModel, g: GroupElement, A: Apartment) -> Symmetry:
    p = model.p
    memo: dict = {}

    def vmap(x, g=g):
        if x not in memo:
            c = apartment_coords(act_vertex(g, standard_apartment_embed(x, p)))
            memo[x] = None if c is None else A.vertex(c)
        return memo[x]

    return Symmetry(label=str(g), vertex_map=vmap, module_matrix=model.action_matrix(g), element=g)


def monomial_group(model: FiniteGroupModel) -> list[GroupElement]:
    """Permutation matrices times diagonal units mod p^M."""
    d, q, p = model.d, model.q, model.p
    units = [u for u in range(q) if u % p]
    out = set()
    for perm in itertools.permutations(range(d)):
        for diag in itertools.product(units, repeat=d):
            out.add(tuple(tuple(diag[i] if perm[i] == j else 0 for j in range(d)) for i in range(d)))
    return sorted(out)


def stabilizer(E: IdempotentSystem, sigma: SubComplex) -> list[Symmetry]:
    """Declared symmetries mapping the vertex set of sigma onto itself."""
    vs = set(sigma.vertices())
    out = []
    for g in E.symmetries:
        img = [g.vertex_map(v) for v in vs]
        if None not in img and set(img) == vs:
            out.append(g)
    return out


# ---------------------------------------------------------------------------
# checkers


def check_group_consistency(K: dict, sigma: SubComplex, q: int,
                            symmetry: Sequence[tuple[GroupElement, Callable]] = ()) -> Report:
    """Set-level conditions: K_xK_y = K_yK_x, K_z ⊆ K_xK_y, gK_xg^{-1} = K_{gx}."""
    A = sigma.apartment
    rep = Report()
    verts = sigma.vertices()
    prods: dict = {}

    def prod(x, y):
        if (x, y) not in prods:
            prods[(x, y)] = product_set(K[x], K[y], q)
        return prods[(x, y)]

    bad = None
    for x, y in itertools.combinations(verts, 2):
        if A.adjacent(x, y) and prod(x, y) != prod(y, x):
            bad = (x, y)
            break
    rep.add("group (a) K_x K_y = K_y K_x for adjacent x, y", bad is None, bad)
    bad = None
    for x in verts:
        for y in verts:
            for z in A.hull_vertices([x], [y]):
                if z == x or not A.adjacent(x, z) or z not in K:
                    continue
                if not set(K[z]) <= prod(x, y):
                    missing = next(g for g in K[z] if g not in prod(x, y))
                    bad = {"x": x, "y": y, "z": z, "missing": missing}
                    break
            if bad:
                break
        if bad:
            break
    rep.add("group (b) K_z ⊆ K_x K_y for z in hull(x, y) adjacent to x", bad is None, bad)
    if symmetry:
        bad = None
        for g, vmap in symmetry:
            ginv = _group_inverse(g, q)
            for x in verts:
                gx = vmap(x)
                if gx is None or gx not in K:
                    continue
                conj = {gmul(gmul(g, k, q), ginv, q) for k in K[x]}
                if conj != set(K[gx]):
                    bad = {"g": g, "x": x}
                    break
            if bad:
                break
        rep.add("group (c) g K_x g^-1 = K_gx", bad is None, bad)
    return rep


def _group_inverse(g: GroupElement, q: int) -> GroupElement:
    p = min(f for f in range(2, q + 1) if q % f == 0)
    return ginverse(g, p, q)


def check_idempotent_consistency(E: IdempotentSystem, sigma: SubComplex,
                                 simplex_level: bool = True) -> Report:
    """Exact matrix checks of (a), (b), the all-z variant of (b), (c), (d), (e)."""
    A = sigma.apartment
    rep = Report()
    verts = sigma.vertices()
    vset = set(verts)
    bad = None
    for x, y in itertools.combinations(verts, 2):
        if A.adjacent(x, y) and E.e(x) @ E.e(y) != E.e(y) @ E.e(x):
            bad = (x, y)
            break
    rep.add("(a) e_x e_y = e_y e_x for adjacent x, y", bad is None, bad)
    ok_a = bad is None

    bad_adj = None
    bad_all = None
    for x in verts:
        for y in verts:
            exy = E.e(x) @ E.e(y)
            for z in A.hull_vertices([x], [y]):
                if z not in vset and not E.defined_at(z):
                    continue
                lhs = E.e(x) @ E.e(z) @ E.e(y)
                if lhs != exy:
                    w = {"x": x, "y": y, "z": z}
                    if A.adjacent(x, z) and bad_adj is None:
                        bad_adj = w
                    if bad_all is None:
                        bad_all = w
    rep.add("(b) e_x e_z e_y = e_x e_y for z in hull(x, y) adjacent to x", bad_adj is None, bad_adj)
    rep.add("(b*) e_x e_z e_y = e_x e_y for all z in hull(x, y)", bad_all is None, bad_all)
    ok_b = bad_adj is None

    if E.symmetries:
        bad = None
        for g in E.symmetries:
            P = g.module_matrix
            Pinv = P.transpose()
            for x in verts:
                gx = g.vertex_map(x)
                if gx is None or gx not in vset:
                    continue
                if P @ E.e(x) @ Pinv != E.e(gx):
                    bad = {"g": g.label, "x": x}
                    break
            if bad:
                break
        rep.add("(c) pi_g e_x pi_g^-1 = e_gx", bad is None, bad)

    if simplex_level and ok_a:
        simp = sigma.sorted_simplices()
        bad = None
        for s, t in itertools.combinations_with_replacement(simp, 2):
            union = s | t
            if not all(A.adjacent(a, b) for a in union for b in union):
                continue
            st = A.span(union)
            if st not in sigma.simplices:
                continue
            if E.e_simplex(s) @ E.e_simplex(t) != E.e_simplex(st):
                bad = {"sigma": s, "tau": t}
                break
        name = "(d) e_sigma e_tau = e_[sigma,tau] for adjacent sigma, tau"
        if bad is not None and ok_b:
            name += " [fails although (a) and (b) passed]"
        rep.add(name, bad is None, bad)
        bad = None
        for s in simp:
            es = E.e_simplex(s)
            for t in simp:
                est = es @ E.e_simplex(t)
                for om in A.hull(s, t).sorted_simplices():
                    if om not in sigma.simplices:
                        continue
                    if es @ E.e_simplex(om) @ E.e_simplex(t) != est:
                        bad = {"sigma": s, "omega": om, "tau": t}
                        break
                if bad:
                    break
            if bad:
                break
        name = "(e) e_sigma e_omega e_tau = e_sigma e_tau for omega in hull(sigma, tau)"
        if bad is not None and ok_b:
            name += " [fails although (a) and (b) passed]"
        rep.add(name, bad is None, bad)
    return rep


def support_projection(E: IdempotentSystem, sigma: SubComplex, check_admissible: bool = True,
                       verify: bool = True) -> QMatrix:
    """u = sum over sigma of (-1)^dim e_sigma, with its defining properties verified."""
    A = sigma.apartment
    if check_admissible:
        w = A.admissibility_witness(sigma)
        if w is not None:
            raise NotAdmissible(f"subcomplex is not admissible: {w[0]}")
    u = QMatrix(E.dim, E.dim)
    for s in sigma.sorted_simplices():
        term = E.e_simplex(s)
        u = u + term if A.dim(s) % 2 == 0 else u - term
    if verify:
        rep = support_projection_report(E, sigma, u)
        if not rep.passed:
            raise ConsistencyFailure("; ".join(c.name for c in rep.failures()))
    return u


def support_projection_report(E: IdempotentSystem, sigma: SubComplex, u: QMatrix) -> Report:
    rep = Report()
    n = E.dim
    rep.add("u^2 = u", u @ u == u)
    bad = None
    for x in sigma.vertices():
        ex = E.e(x)
        if ex @ u != ex or u @ ex != ex:
            bad = x
            break
    rep.add("e_x u = e_x = u e_x", bad is None, bad)
    es = [E.e(x) for x in sigma.vertices()]
    span = linalg.hstack(es, n) if es else QMatrix(n, 0)
    ru = linalg.rank(u)
    rspan = linalg.rank(span)
    rep.add("im u = sum of im e_x", ru == rspan and linalg.span_contains(u, span),
            {"rank_u": ru, "rank_sum": rspan})
    kern = linalg.intersection_of_kernels(es, n)
    kmat = QMatrix.from_columns(kern, n) if kern else QMatrix(n, 0)
    rep.add("ker u = intersection of ker e_x", (u @ kmat).is_zero() and len(kern) == n - ru,
            {"dim_ker_u": n - ru, "dim_intersection": len(kern)})
    return rep


def check_dplus_multiplicativity(e: QMatrix, generators: Sequence[QMatrix],
                                 inverses: Sequence[QMatrix | None] | None = None) -> Report:
    """e g e h e = e g h e for generator pairs, and e G e G^-1 = G e G^-1 e.

    Generators are module operators.  The commuting condition needs an
    inverse; a generator without one raises OutOfValidityRange.
    """
    rep = Report()
    if e @ e != e:
        raise IdempotentError("e is not idempotent")
    bad = None
    for a, g in enumerate(generators):
        for b, h in enumerate(generators):
            if e @ g @ e @ h @ e != e @ g @ h @ e:
                bad = (a, b)
                break
        if bad:
            break
    rep.add("e g e h e = e g h e", bad is None, bad)
    if inverses is not None:
        bad = None
        for a, (g, gi) in enumerate(zip(generators, inverses)):
            if gi is None:
                raise OutOfValidityRange(f"generator {a} has no inverse in the model")
            if e @ g @ e @ gi != g @ e @ gi @ e:
                bad = a
                break
        rep.add("e G e G^-1 = G e G^-1 e", bad is None, bad)
    return rep


def double_coset_product_holds(U: Sequence[GroupElement], g, h, q: int) -> bool:
    """Whether U g U h U = U gh U as sets of matrices modulo q.

    g and h are integer matrices (not necessarily invertible mod q).  The
    caller chooses q large enough that the sets are determined modulo q.
    """
    gq = tuple(tuple(x % q for x in row) for row in g)
    hq = tuple(tuple(x % q for x in row) for row in h)
    ghq = gmul(gq, hq, q)
    UgU = {gmul(gmul(a, gq, q), b, q) for a in U for b in U}
    left = {gmul(gmul(x, hq, q), b, q) for x in UgU for b in U}
    right = {gmul(gmul(a, ghq, q), b, q) for a in U for b in U}
    return left == right


# ---------------------------------------------------------------------------
# the D^+ monoid at finite level


def omega(d: int, p: int, l: int) -> list[list[int]]:
    """Diagonal matrix with l entries p followed by d - l entries 1."""
    return [[(p if i < l else 1) if i == j else 0 for j in range(d)] for i in range(d)]


def conjugate_by_omega(K: Sequence[GroupElement], l: int, p: int, M: int) -> list[GroupElement]:
    """Image of Ω_l K̃ Ω_l^{-1} mod p^M, K̃ the full preimage of K in GL_d(Z_p).

    Entry (i, j) is scaled by p^(a_i - a_j), a = exponents of Ω_l.  An entry
    divided by p is known only modulo p^(M-1), so every lift is included.
    Raises OutOfValidityRange when the conjugate is not integral.
    """
    q = p ** M
    d = len(K[0])
    a = [1 if i < l else 0 for i in range(d)]
    out = set()
    for k in K:
        choices = []
        for i in range(d):
            for j in range(d):
                s = a[i] - a[j]
                if s >= 0:
                    choices.append([(k[i][j] * p ** s) % q])
                else:
                    if k[i][j] % p:
                        raise OutOfValidityRange("conjugate by Ω leaves the integral matrices")
                    base = (k[i][j] // p) % (q // p)
                    choices.append([base + t * (q // p) for t in range(p)])
        for entries in itertools.product(*choices):
            out.add(tuple(tuple(entries[i * d:(i + 1) * d]) for i in range(d)))
    return sorted(out)


def check_dplus_group(U: Sequence[GroupElement], p: int, M: int, d: int) -> Report:
    """U Ω_a U Ω_b U = U Ω_a Ω_b U for generator pairs, and U · Ω U Ω^-1 = Ω U Ω^-1 · U.

    Set identities in M_d(Z_p) imply the same identities for the images
    modulo p^M, which is what is enumerated here.
    """
    q = p ** M
    rep = Report()
    gens = [omega(d, p, l) for l in range(1, d)]
    bad = None
    for a, g in enumerate(gens, start=1):
        for b, h in enumerate(gens, start=1):
            if not double_coset_product_holds(U, g, h, q):
                bad = (a, b)
                break
        if bad:
            break
    rep.add("U Ω_a U Ω_b U = U Ω_a Ω_b U", bad is None, bad)
    bad = None
    for l in range(1, d):
        conj = conjugate_by_omega(U, l, p, M)
        if product_set(U, conj, q) != product_set(conj, U, q):
            bad = l
            break
    rep.add("U · Ω_l U Ω_l^-1 = Ω_l U Ω_l^-1 · U", bad is None, bad)
    return rep


def search_commuting_condition(model: FiniteGroupModel, trials: int, rng: random.Random) -> list[dict]:
    """Random small subgroups K and whether av(K) satisfies the commuting condition with Ω_1.

    Each entry records the generators, the order, whether K lies in
    1 + M_d(P), whether K is normal in GL_d (needed for an equivariant
    system), and the outcome (True, False, or "outside model").
    """
    p, M, q, d = model.p, model.M, model.q, model.d
    group = model._enumerate_group() if model.space != "regular" else model.points
    results = []
    for _ in range(trials):
        gens = [group[rng.randrange(len(group))] for _ in range(rng.randint(1, 2))]
        K = subgroup_closure(gens, q, d)
        in_radical = all((k[i][j] - int(i == j)) % p == 0 for k in K for i in range(d) for j in range(d))
        try:
            conj = conjugate_by_omega(K, 1, p, M)
            holds = product_set(K, conj, q) == product_set(conj, K, q)
        except OutOfValidityRange:
            holds = "outside model"
        results.append({"generators": gens, "order": len(K), "in_1+M(P)": in_radical,
                        "normal": is_normal(K, model), "commuting": holds})
    return results


def general_linear_generators(d: int, p: int, M: int) -> list[GroupElement]:
    """Elementary matrices and diagonal units; they generate GL_d(Z/p^M)."""
    q = p ** M
    one = gidentity(d)
    gens = []
    for i in range(d):
        for j in range(d):
            if i != j:
                gens.append(tuple(tuple(int(a == b) + int(a == i and b == j) for b in range(d))
                                  for a in range(d)))
    units = [u for u in range(2, q) if u % p]
    for i in range(d):
        for u in units:
            gens.append(tuple(tuple((u if a == b == i else one[a][b]) for b in range(d)) for a in range(d)))
    return gens


def is_normal(K: Sequence[GroupElement], model: FiniteGroupModel) -> bool:
    q, p = model.q, model.p
    Kset = set(K)
    for g in general_linear_generators(model.d, p, model.M):
        ginv = ginverse(g, p, q)
        if any(gmul(gmul(g, k, q), ginv, q) not in Kset for k in K):
            return False
    return True
