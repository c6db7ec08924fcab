import itertools
import random
from fractions import Fraction

import pytest

from btcosheaf import Apartment, IdempotentSystem
from btcosheaf.batteries import reference_model
from btcosheaf.building import canonical_vertex, standard_vertex
from btcosheaf.idempotents import (FiniteGroupModel, NonCommutingVertices, NonConvexSupport,
                                   NotAdmissible, NotASubgroup, OutOfValidityRange,
                                   averaging_idempotent, check_dplus_group,
                                   check_dplus_multiplicativity, check_group_consistency,
                                   check_idempotent_consistency, congruence_subgroup,
                                   diagonal_model, direct_average, double_coset_product_holds,
                                   gidentity, gmul, is_closed, omega, product_set,
                                   search_commuting_condition,
                                   stabilizer, subgroup_closure, support_projection)
from btcosheaf.linalg import QMatrix

A2 = Apartment(3)
TREE = Apartment(2)


def diag(*entries):
    return [[entries[i] if i == j else 0 for j in range(len(entries))] for i in range(len(entries))]


@pytest.fixture(scope="module")
def ref20():
    return reference_model(2, 0)


@pytest.fixture(scope="module")
def ref21():
    return reference_model(2, 1)


# finite groups and averages


def test_projective_line_size():
    # |P^1(Z/p^M)| = p^(M-1) (p + 1)
    assert FiniteGroupModel(2, 2, 2).module_dim == 6
    assert FiniteGroupModel(2, 3, 2).module_dim == 12
    assert FiniteGroupModel(2, 2, 3).module_dim == 12
    assert FiniteGroupModel(2, 2, 2, "regular").module_dim == 96


def test_average_of_trivial_group_is_identity():
    model = FiniteGroupModel(2, 2, 2)
    assert averaging_idempotent([gidentity(2)], model) == QMatrix.identity(6)


def test_average_of_whole_group_on_itself_projects_onto_constants():
    model = FiniteGroupModel(2, 2, 1, "regular")
    e = averaging_idempotent(model.points, model)
    n = model.module_dim
    assert n == 6
    assert e == QMatrix.from_dense([[Fraction(1, n)] * n for _ in range(n)])


def _union_find_orbits(elements, model):
    parent = list(range(model.module_dim))

    def find(a):
        while parent[a] != a:
            a = parent[a]
        return a

    for g in elements:
        for i, x in enumerate(model.points):
            j = model.index[model.act_point(g, x)]
            parent[find(i)] = find(j)
    return len({find(i) for i in range(model.module_dim)})


def test_average_rank_is_orbit_count():
    model = FiniteGroupModel(2, 2, 2, "regular")
    U = congruence_subgroup(standard_vertex(2, 2), 0, 2)
    e = averaging_idempotent(U, model)
    assert e @ e == e
    assert e.trace() == _union_find_orbits(U, model) == 6
    assert e == direct_average(U, model)


def test_average_rejects_non_subgroups():
    model = FiniteGroupModel(2, 2, 2)
    with pytest.raises(NotASubgroup):
        averaging_idempotent([gidentity(2), ((1, 1), (0, 1))], model)


def test_subgroup_closure():
    K = subgroup_closure([((1, 1), (0, 1))], 4, 2)
    assert len(K) == 4 and is_closed(K, 4)


# congruence subgroups


def test_congruence_subgroup_of_standard_vertex():
    U = congruence_subgroup(standard_vertex(2, 2), 0, 2)
    direct = sorted(((((1 + 2 * a) % 4, (2 * b) % 4), ((2 * c) % 4, (1 + 2 * d) % 4))
                     for a, b, c, d in itertools.product(range(2), repeat=4)))
    assert U == direct
    assert len(U) == 16
    assert is_closed(U, 4)


def test_congruence_subgroup_of_shifted_vertex():
    p, M = 2, 2
    U = congruence_subgroup(canonical_vertex(diag(p, 1), p), 0, M)
    # g_ij - δ_ij ∈ P^(1 + n_i - n_j) with n = (1, 0)
    for g in U:
        assert (g[0][0] - 1) % p == 0 and (g[1][1] - 1) % p == 0
        assert g[0][1] % (p * p) == 0
    assert len(U) == 2 * 2 * 1 * 4
    assert U == congruence_subgroup(canonical_vertex(diag(p * p, p), p), 0, M)


def test_congruence_subgroup_outside_depth():
    with pytest.raises(OutOfValidityRange):
        congruence_subgroup(canonical_vertex(diag(8, 1), 2), 0, 2)


def test_stabilizer_sizes():
    for (p, r), size in {(2, 0): 4, (2, 1): 32, (3, 0): 36}.items():
        ref = reference_model(p, r)
        assert len(stabilizer(ref.system, ref.sigma)) == size


# set-level consistency


def test_group_consistency_of_reference_models(ref20, ref21):
    for ref in (ref20, ref21):
        syms = [(g.element, g.vertex_map) for g in ref.system.symmetries]
        rep = check_group_consistency(ref.K, ref.sigma, ref.model.q, syms)
        assert rep.passed, rep.failures()


def test_group_consistency_fails_when_a_subgroup_shrinks(ref21):
    K = dict(ref21.K)
    K[(-1, 0)] = [gidentity(2)]
    rep = check_group_consistency(K, ref21.sigma, ref21.model.q)
    failed = [c.name for c in rep.failures()]
    assert any(name.startswith("group (b)") for name in failed)
    witness = next(c.witness for c in rep.failures() if c.name.startswith("group (b)"))
    assert witness["missing"] not in K[witness["x"]]


def test_group_consistency_of_a_single_vertex(ref20):
    S = TREE.induced([(0, 0)])
    assert check_group_consistency({(0, 0): ref20.K[(0, 0)]}, S, ref20.model.q).passed


# idempotent consistency


def test_diagonal_model_on_convex_complex_is_consistent():
    S = A2.enumerate_box((0, 0, 0), (2, 2, 0))
    supports = [A2.hull([(0, 0, 0)], [(1, 1, 0)]), A2.hull([(1, 0, 0)], [(2, 2, 0)]),
                A2.hull([(2, 0, 0)]), S]
    E = diagonal_model(S, supports)
    assert check_idempotent_consistency(E, S).passed


def test_group_model_is_consistent(ref21):
    rep = check_idempotent_consistency(ref21.system, ref21.sigma)
    assert rep.passed, rep.failures()
    assert any(c.name.startswith("(c)") for c in rep.checks)


def test_noncommuting_projections_fail_condition_a():
    S = TREE.induced([(0, 0), (1, 0)])
    half = Fraction(1, 2)
    mats = {(0, 0): QMatrix.diagonal([1, 0]), (1, 0): QMatrix.from_dense([[half, half], [half, half]])}
    E = IdempotentSystem(TREE, 2, lambda x: mats[x], "custom", domain=S)
    rep = check_idempotent_consistency(E, S)
    assert [c.name for c in rep.failures()] == ["(a) e_x e_y = e_y e_x for adjacent x, y"]
    with pytest.raises(NonCommutingVertices):
        E.e_simplex(frozenset(mats))


def test_simplex_idempotents_in_the_diagonal_model():
    S = A2.enumerate_box((0, 0, 0), (1, 1, 0))
    supports = [A2.hull([(0, 0, 0)]), A2.hull([(0, 0, 0)], [(1, 0, 0)]), S]
    E = diagonal_model(S, supports)
    x, y = (0, 0, 0), (1, 0, 0)
    assert E.e_simplex(frozenset([x])) == E.e(x)
    assert E.e_simplex(frozenset([x, y])) == QMatrix.diagonal([0, 1, 1])


def test_edge_idempotent_is_the_product_average(ref20):
    x, y = (0, 0), (1, 0)
    prod = sorted(product_set(ref20.K[x], ref20.K[y], ref20.model.q))
    assert averaging_idempotent(prod, ref20.model) == ref20.system.e_simplex(frozenset([x, y]))


# diagonal model construction


def test_diagonal_model_edge_cases():
    S = A2.enumerate_box((0, 0, 0), (1, 1, 0))
    E = diagonal_model(S, [S])
    assert all(E.e(x) == QMatrix.identity(1) for x in S.vertices())
    Z = diagonal_model(S, [])
    assert Z.dim == 0 and Z.e((0, 0, 0)).shape == (0, 0)


def test_star_supports_are_consistent():
    S = A2.enumerate_box((0, 0, 0), (2, 2, 0))
    stars = [A2.complex(A2.chambers_at(x)) for x in S.vertices()]
    assert all(A2.is_convex(C) for C in stars)
    E = diagonal_model(S, stars)
    assert check_idempotent_consistency(E, S).passed


def test_non_convex_support_is_rejected():
    S = A2.enumerate_box((0, 0, 0), (1, 1, 0))
    two = A2.complex([frozenset([(0, 0, 0)]), frozenset([(2, 1, 0)])])
    with pytest.raises(NonConvexSupport):
        diagonal_model(S, [two])


# support projections


def test_support_projection_small_cases():
    S = A2.enumerate_box((0, 0, 0), (1, 1, 0))
    supports = [A2.hull([(0, 0, 0)]), A2.hull([(1, 0, 0)], [(1, 1, 0)]), S]
    E = diagonal_model(S, supports)
    x, y = (0, 0, 0), (1, 0, 0)
    assert support_projection(E, A2.induced([x])) == E.e(x)
    edge = A2.induced([x, y])
    assert support_projection(E, edge) == E.e(x) + E.e(y) - E.e(x) @ E.e(y)


def test_support_projection_needs_admissible():
    S = A2.complex(A2.proper_faces(A2.span([(0, 0, 0), (1, 0, 0), (1, 1, 0)])))
    E = diagonal_model(S, [A2.hull([(0, 0, 0)])])
    with pytest.raises(NotAdmissible):
        support_projection(E, S)


# the D+ conditions


def test_dplus_group_conditions_hold_for_congruence_subgroups():
    for p, r in [(2, 0), (2, 1), (3, 0)]:
        U = congruence_subgroup(standard_vertex(2, p), r, r + 2)
        rep = check_dplus_group(U, p, r + 2, 2)
        assert rep.passed, rep.failures()
        assert double_coset_product_holds(U, omega(2, p, 1), omega(2, p, 1), p ** (r + 2))


def test_dplus_commuting_condition_fails_for_unipotent_subgroup():
    K = subgroup_closure([((1, 1), (0, 1))], 4, 2)
    rep = check_dplus_group(K, 2, 2, 2)
    assert [c.name for c in rep.failures()] == ["U · Ω_l U Ω_l^-1 = Ω_l U Ω_l^-1 · U"]


def test_dplus_matrix_identity():
    model = FiniteGroupModel(2, 2, 2)
    U = congruence_subgroup(standard_vertex(2, 2), 0, 2)
    e = averaging_idempotent(U, model)
    gens = [model.action_matrix(g) for g in U[:3]]
    assert check_dplus_multiplicativity(QMatrix.identity(6), gens).passed
    assert check_dplus_multiplicativity(e, gens, [g.transpose() for g in gens]).passed


def test_commuting_search_is_reproducible():
    model = FiniteGroupModel(2, 2, 2)
    a = search_commuting_condition(model, 10, random.Random(5))
    b = search_commuting_condition(model, 10, random.Random(5))
    assert a == b
    for rec in a:
        assert set(rec) == {"generators", "order", "in_1+M(P)", "normal", "commuting"}
        # with this seed, every normal subgroup meeting the condition lies in 1 + M_2(P)
        if rec["normal"] and rec["commuting"] is True:
            assert rec["in_1+M(P)"]


def test_group_multiplication():
    g = ((1, 2), (3, 1))
    assert gmul(g, gidentity(2), 4) == g
