from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dgforge.linalg import (
    DimensionMismatch,
    Echelon,
    Field,
    Matrix,
    kernel_basis,
    kernel_of,
    rank,
    rank_of,
    rref,
    solve,
    solve_in_span,
)
from support import oracle_rank

Q = Field.rationals()
F5 = Field.prime(5)


def M(rows, field=Q):
    return Matrix.from_dense(field, rows)


# fields


def test_field_rejects_composite_characteristic():
    with pytest.raises(ValueError):
        Field.prime(6)
    with pytest.raises(ValueError):
        Field.parse("GF(1)")


def test_field_parse_and_str_round_trip():
    for text in ("Q", "GF(2)", "GF(101)"):
        assert str(Field.parse(text)) == text


def test_scalars_are_canonical():
    assert Q("4/6") == Fraction(2, 3)
    assert Q(Fraction(6, 3)) == 2 and type(Q(Fraction(6, 3))) is int
    assert F5(-1) == 4
    assert F5("1/2") == 3
    assert Q.format(Fraction(-1, 2)) == "-1/2"


def test_inverse():
    assert Q.inv(Fraction(-2, 3)) == Fraction(-3, 2)
    assert F5.inv(2) == 3
    with pytest.raises(ZeroDivisionError):
        F5.inv(5)


# listed examples


def test_rref_examples():
    R, piv = rref(Matrix(Q, 0, 0))
    assert R.shape == (0, 0) and piv == []
    R, piv = rref(Matrix.identity(Q, 2))
    assert R == Matrix.identity(Q, 2) and piv == [0, 1]
    R, piv = rref(M([[2, 4], [1, 2]]))
    assert R.to_dense() == [[1, 2], [0, 0]] and piv == [0]


def test_rank_examples():
    assert rank(Matrix.zero(Q, 3, 3)) == 0
    assert rank(Matrix.identity(Q, 4)) == 4
    assert rank(M([[1, 1], [1, 1]])) == 1


def test_kernel_examples():
    assert kernel_basis(Matrix.identity(Q, 3)).shape == (3, 0)
    assert kernel_basis(Matrix.zero(Q, 2, 2)).shape[1] == 2
    K = kernel_basis(M([[1, 1]]))
    assert K.columns() == [{0: -1, 1: 1}]


def test_solve_examples():
    assert solve(Matrix.identity(Q, 2), [3, 4]) == [3, 4]
    assert solve(Matrix.zero(Q, 2, 2), [1, 0]) is None
    assert solve(M([[1, 2]]), [3]) == [3, 0]


def test_solve_dimension_mismatch_is_an_error():
    with pytest.raises(DimensionMismatch):
        solve(Matrix.identity(Q, 2), [1, 2, 3])


def test_entry_access_out_of_range():
    m = Matrix.identity(Q, 2)
    with pytest.raises(IndexError):
        m[2, 0]


# properties

entries = st.integers(-3, 3)


@st.composite
def matrices(draw, field=Q, max_side=6):
    r = draw(st.integers(0, max_side))
    c = draw(st.integers(0, max_side))
    rows = draw(st.lists(st.lists(entries, min_size=c, max_size=c), min_size=r, max_size=r))
    return Matrix(field, r, c, [{j: field(v) for j, v in enumerate(row) if field(v)} for row in rows])


@settings(max_examples=150, deadline=None)
@given(matrices())
def test_rank_matches_dense_oracle(m):
    # the oracle reads the rows as columns; rank is transpose-invariant
    assert rank(m) == oracle_rank(Q, [m.row(i) for i in range(m.nrows)], m.ncols)


@settings(max_examples=100, deadline=None)
@given(matrices(F5))
def test_rank_nullity_over_fp(m):
    assert rank(m) + kernel_basis(m).shape[1] == m.ncols
    for v in kernel_basis(m).columns():
        assert not m.apply(v)


@settings(max_examples=100, deadline=None)
@given(matrices())
def test_rref_is_idempotent(m):
    R, piv = rref(m)
    R2, piv2 = rref(R)
    assert R2 == R and piv2 == piv
    assert piv == sorted(set(piv))


@settings(max_examples=100, deadline=None)
@given(matrices())
def test_dense_and_sparse_paths_agree(m):
    assert rref(m, dense_threshold=0.0) == rref(m, dense_threshold=2.0)


@settings(max_examples=100, deadline=None)
@given(matrices(), st.lists(entries, min_size=6, max_size=6))
def test_solve_satisfies_equation(m, b):
    b = b[: m.nrows]
    x = solve(m, b)
    if x is not None:
        assert m.apply({j: v for j, v in enumerate(x) if v}) == {i: Q(v) for i, v in enumerate(b) if v}
    else:
        # no solution: appending b raises the rank
        rows = []
        for i in range(m.nrows):
            r = m.row(i)
            if b[i]:
                r[m.ncols] = Q(b[i])
            rows.append(r)
        aug = Matrix(Q, m.nrows, m.ncols + 1, rows)
        assert rank(aug) == rank(m) + 1


@settings(max_examples=100, deadline=None)
@given(st.lists(st.dictionaries(st.integers(0, 7), st.integers(-4, 4).filter(bool), max_size=5), max_size=9))
def test_integer_rank_agrees_with_echelon(vectors):
    e = Echelon(Q)
    for v in vectors:
        e.add(dict(v))
    assert rank_of(Q, [dict(v) for v in vectors]) == len(e)


@settings(max_examples=80, deadline=None)
@given(st.lists(st.dictionaries(st.integers(0, 5), st.integers(-3, 3).filter(bool), max_size=4), max_size=7))
def test_kernel_of_and_solve_in_span(vectors):
    for c in kernel_of(Q, vectors):
        total = {}
        for i, a in c.items():
            Q.axpy(total, a, vectors[i])
        assert not total
    if vectors:
        target = {}
        for i, v in enumerate(vectors):
            Q.axpy(target, i + 1, v)
        sol = solve_in_span(Q, vectors, target)
        assert sol is not None
        back = {}
        for i, a in sol.items():
            Q.axpy(back, a, vectors[i])
        assert back == target


def test_rational_rank_with_fractions():
    vs = [{0: Fraction(1, 2), 1: Fraction(1, 3)}, {0: 3, 1: 2}, {2: Fraction(-7, 5)}]
    assert rank_of(Q, vs) == 2
