from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from btcosheaf import linalg
from btcosheaf.linalg import QMatrix

small = st.integers(min_value=-3, max_value=3)


@st.composite
def matrices(draw, max_rows=6, max_cols=6):
    r = draw(st.integers(1, max_rows))
    c = draw(st.integers(1, max_cols))
    den = draw(st.integers(1, 4))
    return QMatrix.from_dense([[Fraction(draw(small), den) for _ in range(c)] for _ in range(r)])


def test_basic_arithmetic():
    a = QMatrix.from_dense([[1, 2], [3, 4]])
    b = QMatrix.identity(2)
    assert a @ b == a
    assert (a + a) == a.scale(2)
    assert (a - a).is_zero()
    assert a.transpose()[0, 1] == 3
    assert a.trace() == 5
    assert linalg.inverse(a) @ a == b
    assert QMatrix.permutation([1, 0]) @ QMatrix.permutation([1, 0]) == b


def test_singular_inverse():
    with pytest.raises(ZeroDivisionError):
        linalg.inverse(QMatrix.from_dense([[1, 2], [2, 4]]))


def test_column_basis_and_left_inverse():
    m = QMatrix.from_dense([[1, 2, 0], [0, 0, 1], [1, 2, 1]])
    b = linalg.column_basis(m)
    assert b.ncols == 2
    L = linalg.left_inverse(b)
    assert L @ b == QMatrix.identity(2)


def test_solve_and_span():
    a = QMatrix.from_dense([[1, 1], [0, 1], [1, 2]])
    assert linalg.solve(a, [2, 1, 3]) == [1, 1]
    assert linalg.solve(a, [1, 0, 0]) is None
    assert linalg.span_contains(a, QMatrix.from_columns([[2, 1, 3]], 3))


def test_intersection_of_kernels():
    e1 = QMatrix.diagonal([1, 0, 0])
    e2 = QMatrix.diagonal([0, 1, 0])
    ks = linalg.intersection_of_kernels([e1, e2], 3)
    assert ks == [[0, 0, 1]]


@settings(max_examples=60, deadline=None)
@given(matrices())
def test_bareiss_rank_agrees_with_rational_elimination(m):
    assert linalg.bareiss_rank(m) == linalg.rational_rank(m)


@settings(max_examples=60, deadline=None)
@given(matrices())
def test_rank_nullity(m):
    ns = linalg.nullspace(m)
    assert linalg.rank(m) + len(ns) == m.ncols
    for v in ns:
        assert all(x == 0 for x in m.apply(v))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.lists(small, min_size=4, max_size=4), min_size=1, max_size=7))
def test_incremental_span_matches_rank(vectors):
    span = linalg.IncrementalSpan()
    for v in vectors:
        span.add({i: Fraction(x) for i, x in enumerate(v) if x})
    assert len(span) == linalg.rank(QMatrix.from_dense(vectors))
    for v in vectors:
        assert span.contains({i: Fraction(x) for i, x in enumerate(v) if x})
