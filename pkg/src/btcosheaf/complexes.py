"""Cellular chain and cochain complexes of an idempotent system.

For V_σ = e_σ(V) the cosheaf has inclusions V_σ ⊆ V_τ for τ a face of σ
and the sheaf has the projections e_σ : V_τ → V_σ.  Both are assembled as
block matrices over exact rationals and their (co)homology is computed
by exact rank counts.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import linalg
from .apartment import Apartment, AffineRoot, SubComplex
from .idempotents import (ConsistencyFailure, IdempotentError, IdempotentSystem, Symmetry,
                          support_projection, support_projection_report)
from .linalg import QMatrix
from .report import Report


class NotInvariant(IdempotentError):
    pass


class NotExact(IdempotentError):
    pass


class NotCompatible(IdempotentError):
    pass


class MissingConjugator(IdempotentError):
    pass


# ---------------------------------------------------------------------------
# orientation


def _parity(seq: Sequence) -> int:
    """+1 for an even permutation of its sorted order, -1 for odd."""
    sign = 1
    seq = list(seq)
    for i, j in itertools.combinations(range(len(seq)), 2):
        if seq[i] > seq[j]:
            sign = -sign
    return sign


@dataclass
class OrientedComplex:
    """Simplices of a finite complex with the canonical orientation.

    Each irreducible factor of a polysimplex is ordered by the vertex order;
    a facet dropping the i-th vertex of factor b gets the sign
    (-1)^(i + dims of the factors before b).
    """

    complex: SubComplex
    simplices: dict[int, list[frozenset]] = field(default_factory=dict)
    index: dict[frozenset, int] = field(default_factory=dict)
    _inc: dict = field(default_factory=dict, repr=False)

    @property
    def apartment(self) -> Apartment:
        return self.complex.apartment

    @property
    def top(self) -> int:
        return max(self.simplices, default=-1)

    def of_dim(self, n: int) -> list[frozenset]:
        return self.simplices.get(n, [])

    def facets(self, sigma: frozenset) -> list[tuple[frozenset, int]]:
        """(tau, ε_{τσ}) for each codimension-one face tau of sigma."""
        if sigma in self._inc:
            return self._inc[sigma]
        A = self.apartment
        parts = [sorted(p) for p in A.factor_parts(sigma)]
        out = []
        offset = 0
        for b, part in enumerate(parts):
            if len(part) > 1:
                for i in range(len(part)):
                    sub = parts[:b] + [part[:i] + part[i + 1:]] + parts[b + 1:]
                    tau = frozenset(A.join(c) for c in itertools.product(*sub))
                    out.append((tau, (-1) ** (i + offset)))
            offset += len(part) - 1
        self._inc[sigma] = out
        return out

    def incidence(self, tau: frozenset, sigma: frozenset) -> int:
        for t, s in self.facets(sigma):
            if t == tau:
                return s
        return 0

    def orientation_sign(self, sigma: frozenset, vertex_map) -> int:
        """Sign of a simplicial map sigma → g(sigma) relative to the orientations."""
        A = self.apartment
        parts = [sorted(p) for p in A.factor_parts(sigma)]
        image = frozenset(vertex_map(v) for v in sigma)
        img_parts = A.factor_parts(image)
        sign = 1
        for b, part in enumerate(parts):
            # image of each factor vertex, read through any vertex of the
            # polysimplex having that factor coordinate
            seq = []
            for fv in part:
                v = next(w for w in sigma if A.project(w, b) == fv)
                seq.append(A.project(vertex_map(v), b))
            if set(seq) != set(img_parts[b]):
                raise IdempotentError("map does not preserve the factor structure")
            sign *= _parity(seq)
        return sign


def orient(sigma: SubComplex) -> OrientedComplex:
    A = sigma.apartment
    oc = OrientedComplex(sigma)
    for s in sigma.sorted_simplices():
        n = A.dim(s)
        lst = oc.simplices.setdefault(n, [])
        oc.index[s] = len(lst)
        lst.append(s)
    return oc


def constant_boundary(oc: OrientedComplex, n: int) -> QMatrix:
    """∂_n with constant rank-one coefficients."""
    rows = {}
    lo = oc.of_dim(n - 1)
    idx = {t: i for i, t in enumerate(lo)}
    for j, s in enumerate(oc.of_dim(n)):
        for t, e in oc.facets(s):
            rows.setdefault(idx[t], {})[j] = Fraction(e)
    return QMatrix(len(lo), len(oc.of_dim(n)), rows)


# ---------------------------------------------------------------------------
# assembly


@dataclass
class ChainAssembly:
    """Block matrices of the (co)chain complex with V_σ in chosen bases.

    direction "chain": differentials[n] is ∂_n : C_n → C_{n-1}, and the
    augmentation maps C_0 to the ambient module.  direction "cochain":
    differentials[n] is δ^n : C^n → C^{n+1}, and the augmentation maps the
    ambient module to C^0.
    """

    direction: str
    oc: OrientedComplex
    dim: int
    bases: dict[frozenset, QMatrix]
    coords: dict[frozenset, QMatrix]
    offsets: dict[int, dict[frozenset, int]]
    sizes: dict[int, int]
    differentials: dict[int, QMatrix]
    augmentation: QMatrix

    @property
    def top(self) -> int:
        return self.oc.top

    def size(self, n: int) -> int:
        return self.sizes.get(n, 0)

    def export_triples(self) -> str:
        """One line per nonzero entry: degree row col num/den."""
        lines = []
        for n in sorted(self.differentials):
            for i, j, x in self.differentials[n].triples():
                lines.append(f"{n} {i} {j} {x.numerator}/{x.denominator}")
        for i, j, x in self.augmentation.triples():
            lines.append(f"aug {i} {j} {x.numerator}/{x.denominator}")
        return "\n".join(lines) + ("\n" if lines else "")


def _value_bases(E: IdempotentSystem, oc: OrientedComplex):
    bases, coords = {}, {}
    for n in sorted(oc.simplices):
        for s in oc.of_dim(n):
            e = E.e_simplex(s)
            b = linalg.column_basis(e)
            bases[s] = b
            coords[s] = linalg.left_inverse(b) if b.ncols else QMatrix(0, E.dim)
    return bases, coords


def _layout(oc: OrientedComplex, bases):
    offsets, sizes = {}, {}
    for n in sorted(oc.simplices):
        off = 0
        offsets[n] = {}
        for s in oc.of_dim(n):
            offsets[n][s] = off
            off += bases[s].ncols
        sizes[n] = off
    return offsets, sizes


def assemble_chain(E: IdempotentSystem, oc: OrientedComplex, verify: bool = True) -> ChainAssembly:
    bases, coords = _value_bases(E, oc)
    offsets, sizes = _layout(oc, bases)
    diffs = {}
    for n in range(1, oc.top + 1):
        rows: dict[int, dict[int, Fraction]] = {}
        for s in oc.of_dim(n):
            for t, eps in oc.facets(s):
                block = coords[t] @ bases[s]
                r0, c0 = offsets[n - 1][t], offsets[n][s]
                for i, j, x in block.triples():
                    rows.setdefault(r0 + i, {})[c0 + j] = x * eps
        diffs[n] = QMatrix(sizes[n - 1], sizes[n], rows)
    aug = linalg.hstack([bases[s] for s in oc.of_dim(0)], E.dim) if oc.of_dim(0) else QMatrix(E.dim, 0)
    ca = ChainAssembly("chain", oc, E.dim, bases, coords, offsets, sizes, diffs, aug)
    if verify:
        _verify_squares(ca)
    return ca


def assemble_cochain(E: IdempotentSystem, oc: OrientedComplex, verify: bool = True) -> ChainAssembly:
    bases, coords = _value_bases(E, oc)
    offsets, sizes = _layout(oc, bases)
    diffs = {}
    for n in range(0, oc.top):
        rows: dict[int, dict[int, Fraction]] = {}
        for t in oc.of_dim(n + 1):
            et = E.e_simplex(t)
            for s, eps in oc.facets(t):
                block = coords[t] @ et @ bases[s]
                r0, c0 = offsets[n + 1][t], offsets[n][s]
                for i, j, x in block.triples():
                    rows.setdefault(r0 + i, {})[c0 + j] = x * eps
        diffs[n] = QMatrix(sizes[n + 1], sizes[n], rows)
    verts = oc.of_dim(0)
    if verts:
        aug = linalg.vstack([coords[x] @ E.e(next(iter(x))) for x in verts], E.dim)
    else:
        aug = QMatrix(0, E.dim)
    ca = ChainAssembly("cochain", oc, E.dim, bases, coords, offsets, sizes, diffs, aug)
    if verify:
        _verify_squares(ca)
    return ca


def _verify_squares(ca: ChainAssembly) -> None:
    d = ca.differentials
    if ca.direction == "chain":
        for n in range(2, ca.top + 1):
            if not (d[n - 1] @ d[n]).is_zero():
                raise ConsistencyFailure(f"∂_{n - 1} ∂_{n} is not zero")
        if 1 in d and not (ca.augmentation @ d[1]).is_zero():
            raise ConsistencyFailure("augmentation ∘ ∂_1 is not zero")
    else:
        for n in range(1, ca.top):
            if not (d[n] @ d[n - 1]).is_zero():
                raise ConsistencyFailure(f"δ^{n} δ^{n - 1} is not zero")
        if 0 in d and not (d[0] @ ca.augmentation).is_zero():
            raise ConsistencyFailure("δ^0 ∘ augmentation is not zero")


@dataclass
class Homology:
    ranks: dict[int, int]
    degree0_basis: list[list[Fraction]]

    def positive_degrees_vanish(self) -> bool:
        return all(v == 0 for n, v in self.ranks.items() if n > 0)


def _rank_cache(ca: ChainAssembly) -> dict[int, int]:
    return {n: linalg.rank(m) for n, m in ca.differentials.items()}


def homology(ca: ChainAssembly) -> Homology:
    """Ranks in every degree and an explicit basis in degree 0.

    In the chain case the degree-0 basis consists of standard basis vectors
    of C_0 complementing im ∂_1.  In the cochain case it is a basis of ker δ^0.
    """
    r = _rank_cache(ca)
    ranks = {}
    if ca.direction == "chain":
        for n in range(0, ca.top + 1):
            ranks[n] = ca.size(n) - r.get(n, 0) - r.get(n + 1, 0)
        basis = complement_basis(ca.differentials.get(1, QMatrix(ca.size(0), 0)))
    else:
        for n in range(0, ca.top + 1):
            ranks[n] = ca.size(n) - r.get(n, 0) - r.get(n - 1, 0)
        d0 = ca.differentials.get(0, QMatrix(0, ca.size(0)))
        if ca.size(0) == 0:
            basis = []
        elif d0.nrows == 0:
            basis = [[Fraction(int(i == j)) for i in range(ca.size(0))] for j in range(ca.size(0))]
        else:
            basis = linalg.nullspace(d0)
    return Homology(ranks, basis)


def complement_basis(image: QMatrix) -> list[list[Fraction]]:
    """Standard basis vectors completing the column space of ``image``."""
    n = image.nrows
    current = image
    base_rank = linalg.rank(image)
    out = []
    for i in range(n):
        unit = QMatrix.from_columns([[Fraction(int(k == i)) for k in range(n)]], n)
        trial = linalg.hstack([current, unit], n)
        rk = linalg.rank(trial)
        if rk > base_rank:
            current, base_rank = trial, rk
            out.append([Fraction(int(k == i)) for k in range(n)])
    return out


# ---------------------------------------------------------------------------
# resolution


def _columns(vectors: list[list[Fraction]], n: int) -> QMatrix:
    return QMatrix.from_columns(vectors, n) if vectors else QMatrix(n, 0)


def image_sum(E: IdempotentSystem, sigma: SubComplex) -> QMatrix:
    """A basis (as columns) of the sum of the images of the vertex idempotents."""
    es = [E.e(x) for x in sigma.vertices()]
    if not es:
        return QMatrix(E.dim, 0)
    return linalg.column_basis(linalg.hstack(es, E.dim))


def kernel_intersection(E: IdempotentSystem, sigma: SubComplex) -> QMatrix:
    return _columns(linalg.intersection_of_kernels([E.e(x) for x in sigma.vertices()], E.dim), E.dim)


def verify_resolution(E: IdempotentSystem, sigma: SubComplex, check_admissible: bool = True) -> Report:
    """The five resolution checks on a finite admissible subcomplex."""
    rep = Report()
    n = E.dim
    oc = orient(sigma)
    chain = assemble_chain(E, oc)
    cochain = assemble_cochain(E, oc)
    hc, hk = homology(chain), homology(cochain)
    pos_c = {k: v for k, v in hc.ranks.items() if k > 0 and v}
    pos_k = {k: v for k, v in hk.ranks.items() if k > 0 and v}
    rep.add("(i) H_n = 0 and H^n = 0 for n > 0", not pos_c and not pos_k,
            {"chain": pos_c, "cochain": pos_k} if pos_c or pos_k else None)

    img = image_sum(E, sigma)
    ker = kernel_intersection(E, sigma)
    dim_img, dim_ker = img.ncols, ker.ncols
    aug = chain.augmentation
    rank_aug = linalg.rank(aug)
    rank_d1 = linalg.rank(chain.differentials[1]) if 1 in chain.differentials else 0
    h0 = hc.ranks.get(0, 0)
    ok = (rank_aug == dim_img and linalg.span_contains(img, aug) and h0 == dim_img
          and rank_d1 == chain.size(0) - rank_aug)
    rep.add("(ii) augmentation induces H_0 ≅ sum of e_x(V)", ok,
            None if ok else {"dim_H0": h0, "rank_aug": rank_aug, "dim_image_sum": dim_img})

    caug = cochain.augmentation
    rank_caug = linalg.rank(caug)
    h0c = hk.ranks.get(0, 0)
    in_kernel = (cochain.differentials[0] @ caug).is_zero() if 0 in cochain.differentials else True
    ok = in_kernel and rank_caug == h0c and n - rank_caug == dim_ker and ((caug @ ker).is_zero())
    rep.add("(iii) augmentation induces V / ∩ ker e_x ≅ H^0", ok,
            None if ok else {"dim_H^0": h0c, "rank_aug": rank_caug, "dim_kernel_intersection": dim_ker})

    both = linalg.hstack([img, ker], n)
    ok = dim_img + dim_ker == n and linalg.rank(both) == n
    rep.add("(iv) V = sum of e_x(V) ⊕ ∩ ker e_x", ok,
            None if ok else {"dim_image_sum": dim_img, "dim_kernel_intersection": dim_ker, "module_dim": n})

    try:
        u = support_projection(E, sigma, check_admissible=check_admissible, verify=False)
        sp = support_projection_report(E, sigma, u)
        ok = sp.passed and (u @ ker).is_zero() and (u @ img) == img
        rep.add("(v) support projection effects the decomposition", ok,
                None if ok else [c.name for c in sp.failures()])
    except IdempotentError as exc:
        rep.add("(v) support projection effects the decomposition", False, str(exc))
    return rep


# ---------------------------------------------------------------------------
# Mayer-Vietoris and additivity


def _h0_map_rank(small: ChainAssembly, big: ChainAssembly) -> int:
    """Rank of H_0(small) → H_0(big) induced by the inclusion of complexes."""
    incl = inclusion_degree0(small, big)
    d1 = big.differentials.get(1, QMatrix(big.size(0), 0))
    return linalg.rank(linalg.hstack([d1, incl], big.size(0))) - linalg.rank(d1)


def inclusion_degree0(small: ChainAssembly, big: ChainAssembly) -> QMatrix:
    """C_0(small) → C_0(big) for a subcomplex with the same vertex idempotents."""
    rows = {}
    for x, off in small.offsets.get(0, {}).items():
        boff = big.offsets[0][x]
        block = big.coords[x] @ small.bases[x]
        for i, j, v in block.triples():
            rows.setdefault(boff + i, {})[off + j] = v
    return QMatrix(big.size(0), small.size(0), rows)


def mayer_vietoris(E: IdempotentSystem, sigma: SubComplex, root: AffineRoot) -> Report:
    """Rank bookkeeping of the Mayer-Vietoris sequence for a half-space split."""
    A = sigma.apartment
    plus, minus, zero = A.halfspace_split(sigma, root)
    rep = Report()
    adm = {name: A.is_admissible(c) for name, c in (("sigma", sigma), ("plus", plus),
                                                      ("minus", minus), ("zero", zero))}
    rep.add("pieces admissible", all(adm.values()), None if all(adm.values()) else adm)
    union_ok = plus.union(minus) == sigma and plus.intersection(minus) == zero
    rep.add("sigma = plus ∪ minus and zero = plus ∩ minus", union_ok)
    chains = {name: assemble_chain(E, orient(c)) for name, c in
              (("sigma", sigma), ("plus", plus), ("minus", minus), ("zero", zero))}
    H = {name: homology(ca).ranks for name, ca in chains.items()}
    top = max(chains["sigma"].top, 0)
    sizes_ok = all(chains["sigma"].size(k) == chains["plus"].size(k) + chains["minus"].size(k)
                   - chains["zero"].size(k) for k in range(top + 1))
    rep.add("short exact sequence of chain groups", sizes_ok)
    euler = sum((-1) ** k * (H["zero"].get(k, 0) - H["plus"].get(k, 0) - H["minus"].get(k, 0)
                             + H["sigma"].get(k, 0)) for k in range(top + 1))
    rep.add("alternating sum along the long exact sequence vanishes", euler == 0, None if euler == 0 else euler)
    h0 = {k: v.get(0, 0) for k, v in H.items()}
    additive = h0["sigma"] == h0["plus"] + h0["minus"] - h0["zero"]
    rep.add("dim H_0(sigma) = dim H_0(plus) + dim H_0(minus) - dim H_0(zero)", additive, None if additive else h0)
    for side in ("plus", "minus"):
        rk = _h0_map_rank(chains["zero"], chains[side])
        rep.add(f"H_0(zero) → H_0({side}) injective", rk == h0["zero"],
                None if rk == h0["zero"] else {"rank": rk, "dim_H0_zero": h0["zero"]})
    # surjectivity of H_0(plus) ⊕ H_0(minus) → H_0(sigma)
    big = chains["sigma"]
    incl = linalg.hstack([inclusion_degree0(chains["plus"], big), inclusion_degree0(chains["minus"], big)],
                         big.size(0))
    d1 = big.differentials.get(1, QMatrix(big.size(0), 0))
    rk = linalg.rank(linalg.hstack([d1, incl], big.size(0))) - linalg.rank(d1)
    rep.add("H_0(plus) ⊕ H_0(minus) → H_0(sigma) surjective", rk == h0["sigma"])
    return rep


def additivity_report(E: IdempotentSystem, sigma: SubComplex, root: AffineRoot) -> Report:
    """u_Σ = u_+ + u_- - u_0, u_+u_- = u_-u_+ = u_0, and the separation identities."""
    A = sigma.apartment
    plus, minus, zero = A.halfspace_split(sigma, root)
    rep = Report()
    u = {name: support_projection(E, c, check_admissible=False) for name, c in
         (("sigma", sigma), ("plus", plus), ("minus", minus), ("zero", zero))}
    rep.add("u_sigma = u_plus + u_minus - u_zero", u["sigma"] == u["plus"] + u["minus"] - u["zero"])
    pm, mp = u["plus"] @ u["minus"], u["minus"] @ u["plus"]
    rep.add("u_plus u_minus = u_minus u_plus = u_zero", pm == mp == u["zero"])
    rep.add("u_plus u_minus = u_plus u_zero u_minus", pm == u["plus"] @ u["zero"] @ u["minus"])
    bad = None
    only_plus = [x for x in plus.vertices() if x not in set(zero.vertices())]
    only_minus = [y for y in minus.vertices() if y not in set(zero.vertices())]
    for x in only_plus:
        for y in only_minus:
            if E.e(x) @ u["zero"] @ E.e(y) != E.e(x) @ E.e(y):
                bad = (x, y)
                break
        if bad:
            break
    rep.add("e_x u_zero e_y = e_x e_y across the wall", bad is None, bad)
    return rep


def separating_roots(sigma: SubComplex) -> list[AffineRoot]:
    """Roots whose wall meets sigma and leaves vertices strictly on both sides."""
    A = sigma.apartment
    verts = sigma.vertices()
    out = []
    for i, j in A.roots():
        vals = sorted({v[i] - v[j] for v in verts})
        for k in vals[1:-1]:
            out.append(AffineRoot(i, j, -k))
    return out


# ---------------------------------------------------------------------------
# Φ and the Serre closure


def phi(E: IdempotentSystem, sigma: SubComplex, submodule: QMatrix) -> QMatrix:
    """Basis (columns) of the sum of e_x(W) for an e-invariant subspace W."""
    for x in sigma.vertices():
        if not linalg.span_contains(submodule, E.e(x) @ submodule):
            raise NotInvariant(f"subspace is not invariant under e at {x}")
    parts = [E.e(x) @ submodule for x in sigma.vertices()]
    if not parts:
        return QMatrix(E.dim, 0)
    return linalg.column_basis(linalg.hstack(parts, E.dim))


@dataclass
class ModuleWithIdempotents:
    """A finite-dimensional module together with operators e_x for each vertex."""

    dim: int
    ops: dict

    def generated(self, vertices) -> bool:
        """Whether the module equals the sum of e_x of itself."""
        if self.dim == 0:
            return True
        mats = [self.ops[x] for x in vertices]
        if not mats:
            return False
        return linalg.rank(linalg.hstack(mats, self.dim)) == self.dim


def submodule(M: ModuleWithIdempotents, basis: QMatrix) -> tuple[ModuleWithIdempotents, QMatrix]:
    """Induced operators on an invariant subspace; returns (module, inclusion)."""
    L = linalg.left_inverse(basis) if basis.ncols else QMatrix(0, M.dim)
    ops = {}
    for x, e in M.ops.items():
        img = e @ basis
        if not linalg.span_contains(basis, img):
            raise NotCompatible(f"subspace not invariant under e at {x}")
        ops[x] = L @ img
    return ModuleWithIdempotents(basis.ncols, ops), basis


def quotient_module(M: ModuleWithIdempotents, basis: QMatrix) -> tuple[ModuleWithIdempotents, QMatrix]:
    """M / span(basis) in coordinates of complementary standard vectors; returns (module, projection)."""
    n = M.dim
    comp = complement_basis(basis)
    full = linalg.hstack([basis, _columns(comp, n)], n)
    inv = linalg.inverse(full)
    k = basis.ncols
    proj = inv.submatrix(list(range(k, n)), list(range(n)))
    comp_m = _columns(comp, n)
    ops = {x: proj @ e @ comp_m for x, e in M.ops.items()}
    return ModuleWithIdempotents(n - k, ops), proj


def check_serre_closure(sigma: SubComplex, V1: ModuleWithIdempotents, V2: ModuleWithIdempotents,
                        V3: ModuleWithIdempotents, inc: QMatrix, proj: QMatrix) -> Report:
    """The three hereditary implications for P(V) := (V = sum of e_x V)."""
    verts = sigma.vertices()
    if not (proj @ inc).is_zero() or linalg.rank(inc) != V1.dim or linalg.rank(proj) != V3.dim \
            or V1.dim + V3.dim != V2.dim:
        raise NotExact("sequence is not short exact")
    for x in verts:
        if V2.ops[x] @ inc != inc @ V1.ops[x] or proj @ V2.ops[x] != V3.ops[x] @ proj:
            raise NotCompatible(f"maps do not commute with e at {x}")
    P1, P2, P3 = (V.generated(verts) for V in (V1, V2, V3))
    rep = Report()
    w = {"P1": P1, "P2": P2, "P3": P3}
    rep.add("P(V2) implies P(V3)", (not P2) or P3, w)
    rep.add("P(V2) implies P(V1)", (not P2) or P1, w)
    rep.add("P(V1) and P(V3) imply P(V2)", not (P1 and P3) or P2, w)
    return rep


# ---------------------------------------------------------------------------
# corner fullness and stabilization


def _flatten(m: QMatrix) -> dict[int, Fraction]:
    return {i * m.ncols + j: x for i, j, x in m.triples()}


def ideal_span(u: QMatrix, generators: Sequence[QMatrix]) -> linalg.IncrementalSpan:
    """Span of the two-sided ideal generated by u in the algebra generated by
    the given matrices and the identity (closed under multiplication by them
    on either side)."""
    span = linalg.IncrementalSpan()
    queue = [u] if span.add(_flatten(u)) else []
    while queue:
        m = queue.pop()
        for g in generators:
            for cand in (g @ m, m @ g):
                if span.add(_flatten(cand)):
                    queue.append(cand)
    return span


def check_corner_fullness(E: IdempotentSystem, sigma: SubComplex, delta: frozenset,
                          conjugators: Sequence[Symmetry], algebra_generators: Sequence[QMatrix]) -> Report:
    """Every e_x is a corner of a conjugate of u_Δ, and u_Σ lies in the ideal of u_Δ."""
    A = sigma.apartment
    rep = Report()
    if delta not in sigma.maximal():
        raise IdempotentError("delta must be a maximal polysimplex of sigma")
    u_delta = support_projection(E, A.complex([delta]), check_admissible=False)
    identity = Symmetry("identity", lambda v: v, QMatrix.identity(E.dim))
    bad = None
    for x in sigma.vertices():
        found = False
        for g in [identity, *conjugators]:
            if not any(g.vertex_map(v) == x for v in delta):
                continue
            P = g.module_matrix
            conj = P @ u_delta @ linalg.inverse(P)
            if E.e(x) @ conj @ E.e(x) == E.e(x):
                found = True
                break
        if not found:
            if not any(any(g.vertex_map(v) == x for v in delta) for g in [identity, *conjugators]):
                raise MissingConjugator(f"no conjugator maps a vertex of delta to {x}")
            bad = x
            break
    rep.add("e_x = e_x (g u_delta g^-1) e_x for every vertex", bad is None, bad)
    u_sigma = support_projection(E, sigma, check_admissible=False)
    span = ideal_span(u_delta, algebra_generators)
    rep.add("u_sigma lies in the ideal generated by u_delta", span.contains(_flatten(u_sigma)),
            {"ideal_dim": len(span)})
    return rep


def stabilization(E: IdempotentSystem, chain_of_complexes: Sequence[SubComplex]) -> Report:
    """H_0(Σ_i) → H_0(Σ_{i+1}) is injective along a nested sequence."""
    rep = Report()
    cas = [assemble_chain(E, orient(c)) for c in chain_of_complexes]
    for i in range(len(cas) - 1):
        if not chain_of_complexes[i].issubset(chain_of_complexes[i + 1]):
            rep.add(f"step {i}: nested", False)
            continue
        h0 = homology(cas[i]).ranks.get(0, 0)
        rk = _h0_map_rank(cas[i], cas[i + 1])
        rep.add(f"step {i}: H_0 map injective", rk == h0, None if rk == h0 else {"rank": rk, "dim": h0})
    return rep
