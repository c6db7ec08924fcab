from fractions import Fraction

import pytest

from btcosheaf import Apartment, Symmetry, hecke_trace, lefschetz_sum, linalg
from btcosheaf.batteries import character_report, reference_model
from btcosheaf.characters import (NotInvariantComplex, NotStabilizing, chain_action,
                                  equivariance_defect, simplex_character)
from btcosheaf.complexes import assemble_chain, orient
from btcosheaf.idempotents import diagonal_model, stabilizer, support_projection
from btcosheaf.linalg import QMatrix

LINE = Apartment(2)
A2 = Apartment(3)


@pytest.fixture(scope="module")
def ref21():
    return reference_model(2, 1)


def _symmetry(ref, element):
    return next(g for g in ref.system.symmetries if g.element == element)


def _euler_trace(ca, g):
    """Alternating sum of traces of g on the chain groups."""
    return sum((chain_action(ca, g, n).trace() * (-1) ** n for n in range(ca.top + 1)), Fraction(0))


def test_identity_gives_dimensions_and_rank(ref21):
    E, S = ref21.system, ref21.sigma
    oc = orient(S)
    g = _symmetry(ref21, ((1, 0), (0, 1)))
    for s in S.sorted_simplices():
        sign, tr = simplex_character(E, oc, s, g)
        assert sign == 1 and tr == linalg.rank(E.e_simplex(s))
    rep = lefschetz_sum(E, oc, S, g)
    assert rep.equal
    assert rep.lefschetz_sum == linalg.rank(support_projection(E, S))


def test_swapping_an_edge_negates_the_trace():
    S = LINE.induced([(0, 0), (1, 0)])
    E = diagonal_model(S, [S, S])
    swap = Symmetry("swap", {(0, 0): (1, 0), (1, 0): (0, 0)}.get, QMatrix.identity(2))
    oc = orient(S)
    edge = frozenset(S.vertices())
    assert simplex_character(E, oc, edge, swap) == (-1, -2)
    rep = lefschetz_sum(E, oc, S, swap)
    assert [s for s, _, _ in rep.fixed_simplices] == [edge]
    assert rep.lefschetz_sum == rep.ambient_trace == 2


def test_central_element(ref21):
    E, S = ref21.system, ref21.sigma
    oc = orient(S)
    g = _symmetry(ref21, ((7, 0), (0, 7)))
    rep = lefschetz_sum(E, oc, S, g)
    assert len(rep.fixed_simplices) == len(S)
    assert rep.equal


def test_reflection_fixing_the_middle_vertex(ref21):
    E, S = ref21.system, ref21.sigma
    oc = orient(S)
    ca = assemble_chain(E, oc)
    g = _symmetry(ref21, ((0, 1), (1, 0)))
    rep = lefschetz_sum(E, oc, S, g, ca)
    assert [s for s, _, _ in rep.fixed_simplices] == [frozenset([(0, 0)])]
    assert rep.equal
    assert rep.lefschetz_sum == _euler_trace(ca, g)
    assert equivariance_defect(ca, g) is None


def test_every_stabilizing_symmetry_satisfies_the_trace_formula(ref21):
    E, S = ref21.system, ref21.sigma
    oc = orient(S)
    ca = assemble_chain(E, oc)
    for g in stabilizer(E, S):
        rep = lefschetz_sum(E, oc, S, g, ca)
        assert rep.equal and rep.lefschetz_sum == _euler_trace(ca, g)


def test_hecke_trace_of_zero(ref21):
    g = _symmetry(ref21, ((1, 0), (0, 1)))
    h = hecke_trace([(Fraction(0), g)], ref21.system, ref21.sigma)
    assert h.consistent and h.trace_h0 == 0


def test_hecke_trace_of_the_stabilizer_average(ref21):
    E, S = ref21.system, ref21.sigma
    stab = stabilizer(E, S)
    f = [(Fraction(1, len(stab)), g) for g in stab]
    h = hecke_trace(f, E, S)
    avg = QMatrix(E.dim, E.dim)
    for c, g in f:
        avg = avg + g.module_matrix.scale(c)
    assert h.consistent
    assert h.trace_h0 == linalg.rank(avg @ support_projection(E, S))


def test_character_report(ref21):
    assert character_report(ref21, seed=3, random_elements=5).passed


def test_non_stabilizing_inputs_are_rejected(ref21):
    S = LINE.induced([(0, 0), (1, 0)])
    E = diagonal_model(S, [S])
    shift = Symmetry("shift", lambda v: (v[0] + 1, 0), QMatrix.identity(1))
    with pytest.raises(NotStabilizing):
        simplex_character(E, orient(S), frozenset([(0, 0)]), shift)
    with pytest.raises(NotInvariantComplex):
        lefschetz_sum(E, orient(S), S, shift)
