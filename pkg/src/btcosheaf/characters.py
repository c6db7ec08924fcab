"""Traces of symmetries on the resolution and the Lefschetz character formula."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import linalg
from .apartment import SubComplex
from .complexes import ChainAssembly, OrientedComplex, assemble_chain, complement_basis, orient
from .idempotents import IdempotentError, IdempotentSystem, Symmetry, support_projection
from .linalg import QMatrix


class NotStabilizing(IdempotentError):
    pass


class NotInvariantComplex(IdempotentError):
    pass


@dataclass
class CharacterReport:
    element: str
    lefschetz_sum: Fraction
    ambient_trace: Fraction
    fixed_simplices: list[tuple[frozenset, int, Fraction]] = field(default_factory=list)

    @property
    def equal(self) -> bool:
        return self.lefschetz_sum == self.ambient_trace

    def to_json(self) -> dict:
        return {
            "element": self.element,
            "lefschetz_sum": str(self.lefschetz_sum),
            "ambient_trace": str(self.ambient_trace),
            "fixed_simplices": [{"simplex": sorted(list(v) for v in s), "sign": sign, "trace": str(t)}
                                for s, sign, t in self.fixed_simplices],
        }


def simplex_character(E: IdempotentSystem, oc: OrientedComplex, sigma: frozenset, g: Symmetry,
                      ca: ChainAssembly | None = None) -> tuple[int, Fraction]:
    """(orientation sign, signed trace of g on V_σ) for a simplex fixed by g."""
    image = g.map_simplex(sigma)
    if image != sigma:
        raise NotStabilizing(f"{g.label} does not fix the simplex")
    sign = oc.orientation_sign(sigma, g.vertex_map)
    if ca is not None:
        B, L = ca.bases[sigma], ca.coords[sigma]
    else:
        B = linalg.column_basis(E.e_simplex(sigma))
        L = linalg.left_inverse(B) if B.ncols else QMatrix(0, E.dim)
    return sign, sign * (L @ g.module_matrix @ B).trace()


def _check_stabilizes(g: Symmetry, sigma: SubComplex) -> None:
    for s in sigma.simplices:
        img = g.map_simplex(s)
        if img is None or img not in sigma.simplices:
            raise NotInvariantComplex(f"{g.label} does not preserve the complex")


def lefschetz_sum(E: IdempotentSystem, oc: OrientedComplex, sigma: SubComplex, g: Symmetry,
                  ca: ChainAssembly | None = None, u: QMatrix | None = None) -> CharacterReport:
    """Σ over fixed simplices of (-1)^dim · sign · trace, against tr(g u_Σ)."""
    _check_stabilizes(g, sigma)
    A = sigma.apartment
    total = Fraction(0)
    fixed = []
    for s in sigma.sorted_simplices():
        if g.map_simplex(s) != s:
            continue
        sign, tr = simplex_character(E, oc, s, g, ca)
        contribution = tr if A.dim(s) % 2 == 0 else -tr
        fixed.append((s, sign, tr))
        total += contribution
    if u is None:
        u = support_projection(E, sigma, check_admissible=False)
    ambient = (g.module_matrix @ u).trace()
    return CharacterReport(g.label, total, ambient, fixed)


def chain_action(ca: ChainAssembly, g: Symmetry, n: int) -> QMatrix:
    """Matrix of g on C_n: the block (gσ, σ) is the orientation sign times π_g."""
    oc = ca.oc
    rows: dict[int, dict[int, Fraction]] = {}
    for s in oc.of_dim(n):
        gs = g.map_simplex(s)
        if gs is None or gs not in ca.offsets[n]:
            raise NotInvariantComplex(f"{g.label} does not preserve the complex")
        sign = oc.orientation_sign(s, g.vertex_map)
        block = ca.coords[gs] @ g.module_matrix @ ca.bases[s]
        r0, c0 = ca.offsets[n][gs], ca.offsets[n][s]
        for i, j, x in block.triples():
            rows.setdefault(r0 + i, {})[c0 + j] = x * sign
    return QMatrix(ca.size(n), ca.size(n), rows)


def _combination_on_chains(ca: ChainAssembly, f: Sequence[tuple[Fraction, Symmetry]], n: int) -> QMatrix:
    acc = QMatrix(ca.size(n), ca.size(n))
    for c, g in f:
        acc = acc + chain_action(ca, g, n).scale(c)
    return acc


@dataclass
class HeckeTrace:
    trace_h0: Fraction
    euler_sum: Fraction
    ambient_trace: Fraction

    @property
    def consistent(self) -> bool:
        return self.trace_h0 == self.euler_sum == self.ambient_trace


def hecke_trace(f: Sequence[tuple[Fraction, Symmetry]], E: IdempotentSystem, sigma: SubComplex,
                ca: ChainAssembly | None = None, u: QMatrix | None = None) -> HeckeTrace:
    """Trace of a combination of symmetries on H_0, by three routes.

    trace_h0 is the trace of the induced map on C_0 / im ∂_1; euler_sum is
    Σ_n (-1)^n tr(f | C_n); ambient_trace is tr(f u_Σ) on the module.
    """
    if ca is None:
        ca = assemble_chain(E, orient(sigma))
    for _, g in f:
        _check_stabilizes(g, sigma)
    euler = Fraction(0)
    for n in range(0, ca.top + 1):
        t = _combination_on_chains(ca, f, n).trace()
        euler += t if n % 2 == 0 else -t
    F0 = _combination_on_chains(ca, f, 0)
    d1 = ca.differentials.get(1, QMatrix(ca.size(0), 0))
    img = linalg.column_basis(d1) if d1.ncols else QMatrix(ca.size(0), 0)
    comp = complement_basis(img)
    k = img.ncols
    if comp:
        full = linalg.hstack([img, QMatrix.from_columns(comp, ca.size(0))], ca.size(0))
        coords = linalg.inverse(full) @ F0 @ QMatrix.from_columns(comp, ca.size(0))
        trace_h0 = sum((coords[k + i, i] for i in range(len(comp))), Fraction(0))
    else:
        trace_h0 = Fraction(0)
    if u is None:
        u = support_projection(E, sigma, check_admissible=False)
    amb = QMatrix(E.dim, E.dim)
    for c, g in f:
        amb = amb + g.module_matrix.scale(c)
    return HeckeTrace(trace_h0, euler, (amb @ u).trace())


def equivariance_defect(ca: ChainAssembly, g: Symmetry) -> int | None:
    """First degree n where g does not commute with ∂_n, or None."""
    for n, d in ca.differentials.items():
        if chain_action(ca, g, n - 1) @ d != d @ chain_action(ca, g, n):
            return n
    return None

