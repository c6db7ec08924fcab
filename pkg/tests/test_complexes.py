import itertools

import pytest

from btcosheaf import Apartment, AffineRoot, Symmetry
from btcosheaf import linalg
from btcosheaf.batteries import reference_model
from btcosheaf.complexes import (MissingConjugator, ModuleWithIdempotents, NotExact, additivity_report,
                                 assemble_chain, assemble_cochain, check_corner_fullness,
                                 check_serre_closure, constant_boundary, homology, image_sum,
                                 kernel_intersection, mayer_vietoris, orient, phi, quotient_module,
                                 separating_roots, stabilization, submodule, verify_resolution)
from btcosheaf.idempotents import diagonal_model, support_projection
from btcosheaf.linalg import QMatrix

A2 = Apartment(3)
SQ = Apartment((2, 2))
LINE = Apartment(2)


def box_model(lo, hi, support_pairs):
    S = A2.enumerate_box(lo, hi)
    supports = [A2.hull([a], [b]) for a, b in support_pairs]
    return S, diagonal_model(S, supports)


# orientation


def test_edge_incidences():
    a, b = (0, 0, 0), (1, 0, 0)
    oc = orient(A2.induced([a, b]))
    edge = frozenset([a, b])
    assert oc.incidence(frozenset([a]), edge) == -1
    assert oc.incidence(frozenset([b]), edge) == 1


def test_boundary_squares_to_zero():
    tri = A2.complex([A2.span([(0, 0, 0), (1, 0, 0), (1, 1, 0)])])
    oc = orient(tri)
    assert (constant_boundary(oc, 1) @ constant_boundary(oc, 2)).is_zero()
    square = SQ.complex([SQ.span([(0, 0, 0, 0), (1, 0, 1, 0)])])
    oc = orient(square)
    d1, d2 = constant_boundary(oc, 1), constant_boundary(oc, 2)
    assert d2.shape == (4, 1) and d1.shape == (4, 4)
    assert sorted(x for _, _, x in d2.triples()) == [-1, -1, 1, 1]
    assert (d1 @ d2).is_zero()


def test_orientation_sign_of_a_swap():
    a, b = (0, 0), (1, 0)
    oc = orient(LINE.induced([a, b]))
    swap = {a: b, b: a}
    assert oc.orientation_sign(frozenset([a, b]), swap.get) == -1
    assert oc.orientation_sign(frozenset([a, b]), lambda v: v) == 1


# assembly and homology


def test_zero_system_gives_empty_assembly():
    S = A2.enumerate_box((0, 0, 0), (1, 1, 0))
    E = diagonal_model(S, [A2.hull([(5, 5, 0)])])
    ca = assemble_chain(E, orient(S))
    assert all(ca.size(n) == 0 for n in range(3))
    assert all(v == 0 for v in homology(ca).ranks.values())


def test_single_vertex():
    S = A2.induced([(0, 0, 0)])
    E = diagonal_model(S, [A2.hull([(0, 0, 0)]), A2.hull([(0, 0, 0)]), A2.hull([(3, 3, 0)])])
    ca = assemble_chain(E, orient(S))
    assert homology(ca).ranks == {0: 2}
    cc = assemble_cochain(E, orient(S))
    assert homology(cc).ranks == {0: 2}
    assert linalg.rank(cc.augmentation) == 2


def test_hexagon_assembly_sizes():
    x = (0, 0, 0)
    S = A2.complex(A2.chambers_at(x))
    supports = [A2.hull([x], [(1, 1, 0)]), A2.hull([(1, 0, 0)], [(0, -1, 0)]), A2.hull([x])]
    E = diagonal_model(S, supports)
    ca = assemble_chain(E, orient(S))
    by_dim = S.by_dimension()
    for n in range(3):
        assert ca.size(n) == sum(linalg.rank(E.e_simplex(s)) for s in by_dim[n])


def test_constant_cosheaf_on_a_contractible_complex():
    S = A2.enumerate_box((0, 0, 0), (2, 2, 0))
    E = diagonal_model(S, [S, S])
    h = homology(assemble_chain(E, orient(S)))
    assert h.ranks[0] == 2 and h.positive_degrees_vanish()


def test_export_triples():
    S = LINE.induced([(0, 0), (1, 0)])
    E = diagonal_model(S, [S])
    text = assemble_chain(E, orient(S)).export_triples()
    assert text.splitlines() == ["1 0 0 -1/1", "1 1 0 1/1", "aug 0 0 1/1", "aug 0 1 1/1"]


def _block_prediction(E, sigma_simplex, A):
    """Homology ranks predicted by splitting V into the blocks e_I^0.

    On the block of I the cosheaf is constant on the faces whose vertices lie
    in I and zero elsewhere, so it contributes rank(e_I^0) times the constant
    homology of that subcomplex.
    """
    verts = sorted(sigma_simplex)
    n = E.dim
    one = QMatrix.identity(n)
    total: dict[int, int] = {}
    for k in range(len(verts) + 1):
        for I in itertools.combinations(verts, k):
            block = one
            for x in verts:
                block = block @ (E.e(x) if x in I else one - E.e(x))
            r = linalg.rank(block)
            if r == 0 or not I:
                continue
            faces = [f for f in A.faces(sigma_simplex) if set(f) <= set(I)]
            oc = orient(A.complex(faces))
            for deg in range(oc.top + 1):
                size = len(oc.of_dim(deg))
                rk_in = linalg.rank(constant_boundary(oc, deg)) if deg > 0 else 0
                rk_out = linalg.rank(constant_boundary(oc, deg + 1)) if deg < oc.top else 0
                total[deg] = total.get(deg, 0) + r * (size - rk_in - rk_out)
    return total


@pytest.mark.parametrize("which", ["triangle", "square", "tetrahedron"])
def test_single_polysimplex_matches_block_decomposition(which):
    if which == "triangle":
        A = A2
        s = A.span([(0, 0, 0), (1, 0, 0), (1, 1, 0)])
    elif which == "square":
        A = SQ
        s = A.span([(0, 0, 0, 0), (1, 0, 1, 0)])
    else:
        A = Apartment(4)
        s = A.span([(0, 0, 0, 0), (1, 0, 0, 0), (1, 1, 0, 0), (1, 1, 1, 0)])
    S = A.complex([s])
    verts = sorted(s)
    supports = []
    for k in range(1, len(verts) + 1):
        for I in itertools.combinations(verts, k):
            supports.append(A.hull(*[[v] for v in I]))
    E = diagonal_model(S, supports)
    got = homology(assemble_chain(E, orient(S))).ranks
    predicted = _block_prediction(E, s, A)
    assert {k: v for k, v in got.items() if v} == {k: v for k, v in predicted.items() if v}
    assert got[0] == linalg.rank(support_projection(E, S))


# resolution


def test_resolution_single_vertex():
    S = A2.induced([(0, 0, 0)])
    E = diagonal_model(S, [A2.hull([(0, 0, 0)]), A2.hull([(4, 4, 0)])])
    assert verify_resolution(E, S).passed


def test_resolution_reference_tree_model():
    ref = reference_model(2, 1)
    rep = verify_resolution(ref.system, ref.sigma)
    assert rep.passed, rep.failures()
    assert len(rep.checks) == 5


def test_resolution_diagonal_box():
    S, E = box_model((0, 0, 0), (2, 2, 0), [((0, 0, 0), (1, 1, 0)), ((2, 0, 0), (2, 2, 0)),
                                            ((3, 3, 0), (3, 3, 0)), ((1, 0, 0), (2, 1, 0))])
    rep = verify_resolution(E, S)
    assert rep.passed
    assert image_sum(E, S).ncols + kernel_intersection(E, S).ncols == E.dim


def test_resolution_fails_for_non_admissible_complex():
    tri = A2.span([(0, 0, 0), (1, 0, 0), (1, 1, 0)])
    S = A2.complex(A2.proper_faces(tri))
    E = diagonal_model(S, [A2.complex([tri])])
    rep = verify_resolution(E, S)
    assert not rep.passed
    assert "(i) H_n = 0 and H^n = 0 for n > 0" in [c.name for c in rep.failures()]


# Mayer-Vietoris and additivity


def test_mayer_vietoris_on_a_box():
    S, E = box_model((0, 0, 0), (3, 2, 0), [((0, 0, 0), (1, 1, 0)), ((2, 0, 0), (3, 2, 0)),
                                            ((1, 2, 0), (3, 2, 0))])
    roots = separating_roots(S)
    assert AffineRoot(0, 2, -1) in roots
    for root in roots:
        assert mayer_vietoris(E, S, root).passed
        assert additivity_report(E, S, root).passed


def test_separating_roots_of_a_vertex():
    assert separating_roots(A2.induced([(0, 0, 0)])) == []


# Φ and the Serre closure


def _module(E, S):
    return ModuleWithIdempotents(E.dim, {x: E.e(x) for x in S.vertices()})


def test_phi():
    S = A2.enumerate_box((0, 0, 0), (1, 1, 0))
    E = diagonal_model(S, [S, S])
    V = QMatrix.identity(2)
    assert linalg.rank(phi(E, S, V)) == 2
    E = diagonal_model(S, [S, A2.hull([(4, 4, 0)])])
    ker = kernel_intersection(E, S)
    assert phi(E, S, ker).ncols == 0
    ref = reference_model(2, 0)
    u = support_projection(ref.system, ref.sigma)
    got = phi(ref.system, ref.sigma, QMatrix.identity(ref.system.dim))
    assert linalg.rank(got) == linalg.rank(u)
    assert linalg.span_contains(u, got) and linalg.span_contains(got, u)


def test_serre_with_zero_submodule():
    S = A2.enumerate_box((0, 0, 0), (1, 1, 0))
    E = diagonal_model(S, [S, A2.hull([(0, 0, 0)])])
    M = _module(E, S)
    V1, inc = submodule(M, QMatrix(2, 0))
    V3, proj = quotient_module(M, QMatrix(2, 0))
    assert V1.dim == 0 and V3.dim == 2
    assert check_serre_closure(S, V1, M, V3, inc, proj).passed


def test_serre_with_image_and_kernel_parts():
    S = A2.enumerate_box((0, 0, 0), (1, 1, 0))
    E = diagonal_model(S, [S, A2.hull([(0, 0, 0)]), A2.hull([(5, 5, 0)])])
    M = _module(E, S)
    img = image_sum(E, S)
    V1, inc = submodule(M, img)
    V3, proj = quotient_module(M, img)
    assert V1.generated(S.vertices())
    assert not M.generated(S.vertices())
    rep = check_serre_closure(S, V1, M, V3, inc, proj)
    assert rep.passed


def test_serre_rejects_non_exact_sequences():
    S = A2.induced([(0, 0, 0)])
    E = diagonal_model(S, [S, S])
    M = _module(E, S)
    with pytest.raises(NotExact):
        check_serre_closure(S, M, M, M, QMatrix.identity(2), QMatrix.identity(2))


# corner fullness


def test_corner_fullness_when_sigma_is_delta():
    S = LINE.induced([(0, 0), (1, 0)])
    E = diagonal_model(S, [S, LINE.hull([(0, 0)])])
    delta = frozenset(S.vertices())
    assert check_corner_fullness(E, S, delta, [], [QMatrix.identity(2)]).passed


def test_corner_fullness_reference_tree_with_one_reflection():
    ref = reference_model(2, 1)
    reflection = next(g for g in ref.system.symmetries
                      if g.element == ((0, 1), (1, 0)))
    delta = frozenset([(0, 0), (1, 0)])
    gens = [ref.model.action_matrix(g.element) for g in ref.system.symmetries[:4]]
    gens += [ref.model.action_matrix(((1, 1), (0, 1))), ref.model.action_matrix(((1, 0), (1, 1)))]
    rep = check_corner_fullness(ref.system, ref.sigma, delta, [reflection], gens)
    assert rep.passed, rep.failures()


def test_corner_fullness_fails_for_an_orthogonal_vertex():
    S = LINE.induced([(0, 0), (1, 0), (2, 0)])
    E = diagonal_model(S, [LINE.hull([(0, 0)], [(1, 0)]), LINE.hull([(2, 0)])])
    delta = frozenset([(0, 0), (1, 0)])
    shift = Symmetry("shift", lambda v: (v[0] + 1, 0), QMatrix.identity(2))
    rep = check_corner_fullness(E, S, delta, [shift], [QMatrix.identity(2)])
    failed = {c.name: c.witness for c in rep.failures()}
    assert failed["e_x = e_x (g u_delta g^-1) e_x for every vertex"] == (2, 0)
    assert "u_sigma lies in the ideal generated by u_delta" in failed


def test_corner_fullness_needs_a_conjugator():
    S = LINE.induced([(0, 0), (1, 0), (2, 0)])
    E = diagonal_model(S, [LINE.hull([(0, 0)], [(1, 0)]), LINE.hull([(2, 0)])])
    with pytest.raises(MissingConjugator):
        check_corner_fullness(E, S, frozenset([(0, 0), (1, 0)]), [], [QMatrix.identity(2)])


# stabilization


def test_stabilization_along_nested_boxes():
    boxes = [A2.enumerate_box((1, 1, 0), (2, 2, 0)), A2.enumerate_box((0, 0, 0), (3, 3, 0)),
             A2.enumerate_box((-1, -1, 0), (4, 4, 0))]
    supports = [A2.hull([(0, 0, 0)], [(2, 1, 0)]), A2.hull([(3, 3, 0)], [(4, 2, 0)]),
                A2.hull([(-1, 0, 0)]), A2.hull([(6, 6, 0)])]
    E = diagonal_model(boxes[-1], supports)
    rep = stabilization(E, boxes)
    assert rep.passed and len(rep.checks) == 2


def test_stabilization_detects_non_nested_input():
    a = A2.enumerate_box((0, 0, 0), (1, 1, 0))
    b = A2.enumerate_box((3, 3, 0), (4, 4, 0))
    E = diagonal_model(b, [A2.hull([(0, 0, 0)])])
    assert not stabilization(E, [a, b]).passed
