"""Invariants checked on random inputs drawn by hypothesis."""

from hypothesis import given, settings
from hypothesis import strategies as st

from btcosheaf import Apartment, assemble_chain, assemble_cochain, homology, linalg, orient
from btcosheaf.batteries import make_rng, random_admissible, random_convex_supports, random_polysimplex
from btcosheaf.complexes import image_sum, kernel_intersection
from btcosheaf.idempotents import check_idempotent_consistency, diagonal_model, support_projection

A2 = Apartment(3)
seeds = st.integers(min_value=0, max_value=10_000)


def _instance(seed):
    rng = make_rng(seed, "support")
    S = random_admissible(A2, rng, (0, 0, 0), (2, 2, 0), min_vertices=3, max_vertices=7)
    supports = random_convex_supports(A2, rng, (-1, -1, 0), (3, 3, 0), int(rng.integers(1, 6)))
    return S, diagonal_model(S, supports)


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_hull_is_convex_and_symmetric(seed):
    rng = make_rng(seed, "hull")
    A = [A2, Apartment(4), Apartment((2, 2))][seed % 3]
    s, t = random_polysimplex(A, rng, 3), random_polysimplex(A, rng, 3)
    h = A.hull(s, t)
    assert h == A.hull(t, s)
    assert s in h.simplices and t in h.simplices
    assert A.is_convex(h)


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_boundary_squares_to_zero(seed):
    S, E = _instance(seed)
    for ca in (assemble_chain(E, orient(S)), assemble_cochain(E, orient(S))):
        for n, d in ca.differentials.items():
            nxt = ca.differentials.get(n + 1)
            if nxt is not None:
                product = d @ nxt if ca.direction == "chain" else nxt @ d
                assert product.is_zero()


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_support_projection_decomposes_the_module(seed):
    S, E = _instance(seed)
    assert check_idempotent_consistency(E, S).passed
    u = support_projection(E, S)
    assert u @ u == u
    for x in S.vertices():
        assert E.e(x) @ u == E.e(x) == u @ E.e(x)
    img, ker = image_sum(E, S), kernel_intersection(E, S)
    assert linalg.rank(u) == img.ncols
    assert img.ncols + ker.ncols == E.dim
    if ker.ncols:
        assert (u @ ker).is_zero()


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_homology_concentrated_in_degree_zero(seed):
    S, E = _instance(seed)
    h = homology(assemble_chain(E, orient(S)))
    assert h.positive_degrees_vanish()
    assert h.ranks.get(0, 0) == linalg.rank(support_projection(E, S))
    hc = homology(assemble_cochain(E, orient(S)))
    assert hc.positive_degrees_vanish()
    assert hc.ranks.get(0, 0) == E.dim - kernel_intersection(E, S).ncols
