import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from matcomp import DenseMatrix, FieldSpec, GF2
from matcomp.fields import (_rref_generic, _rref_gf2, column_basis, matvec,
                            pack_gf2_rows, rank, solve_membership)

from conftest import GF3, Q


def test_fieldspec_validation():
    with pytest.raises(ValueError):
        FieldSpec.gf(4)
    with pytest.raises(ValueError):
        FieldSpec(kind="real", tolerance=-1.0)
    with pytest.raises(ValueError):
        FieldSpec(kind="prime-field", modulus=5, tolerance=0.1)
    assert FieldSpec.gf(2) == GF2


def test_literals_round_trip():
    assert GF3.parse_literal("-1") == 2
    assert Q.parse_literal("3/4") == Fraction(3, 4)
    assert Q.format_literal(Fraction(3, 4)) == "3/4"
    R = FieldSpec.real()
    assert R.parse_literal("0.25") == 0.25
    assert R.parse_literal(R.format_literal(0.1)) == 0.1


@settings(max_examples=200, deadline=None)
@given(st.integers(), st.integers())
def test_gf_axioms(a, b):
    p = 7
    F = FieldSpec.gf(p)
    x, y = F.element(a), F.element(b)
    assert F.add(x, F.neg(x)) == 0
    if x != 0:
        assert F.mul(x, F.inv(x)) == 1
    assert F.mul(x, y) == F.mul(y, x)
    assert F.add(x, y) == F.add(y, x)


@settings(max_examples=200, deadline=None)
@given(st.fractions(max_denominator=50), st.fractions(max_denominator=50))
def test_rational_axioms(x, y):
    assert Q.add(x, Q.neg(x)) == 0
    if x != 0:
        assert Q.mul(x, Q.inv(x)) == 1
    assert Q.sub(Q.add(x, y), y) == x


def test_rank_examples():
    assert rank(DenseMatrix(GF2, [[1, 0], [0, 1]])) == 2
    assert rank(DenseMatrix.zeros(Q, 3, 3)) == 0
    assert rank(DenseMatrix(Q, [[1, 2], [2, 4]])) == 1


def test_rank_degenerate_shapes():
    assert rank(DenseMatrix(GF2, [], cols=0)) == 0
    assert rank(DenseMatrix(GF2, [], cols=5)) == 0
    assert rank(DenseMatrix(GF2, [[]] * 3, cols=0)) == 0


def test_solve_membership_examples():
    assert solve_membership(DenseMatrix(Q, [[1], [1]]), [1, 1]) == [1]
    assert solve_membership(DenseMatrix(Q, [[1], [0]]), [0, 1]) is None
    G5 = FieldSpec.gf(5)
    assert solve_membership(DenseMatrix(G5, [[1, 0], [0, 1]]), [2, 3]) == [2, 3]


def test_solve_membership_free_vars_zero():
    # duplicate columns: leftmost pivot takes the weight, free column gets zero
    D = DenseMatrix(Q, [[1, 1], [2, 2]])
    assert solve_membership(D, [3, 6]) == [3, 0]


def test_column_basis_examples():
    basis, exp = column_basis(DenseMatrix(GF2, [[1, 0], [0, 1]]))
    assert basis == [0, 1] and exp == {}
    basis, exp = column_basis(DenseMatrix(Q, [[1, 1], [1, 1]]))
    assert basis == [0] and exp == {1: [1]}
    basis, exp = column_basis(DenseMatrix(Q, [[1, 0, 1], [0, 1, 1]]))
    assert basis == [0, 1] and exp == {2: [1, 1]}


def _random_dense(rng, rows, cols, field):
    return DenseMatrix(field, [[field.random_element(rng) for _ in range(cols)]
                               for _ in range(rows)], cols=cols)


@pytest.mark.parametrize("field", [GF2, GF3, Q])
def test_rank_transpose_invariant(field):
    rng = random.Random(11)
    for _ in range(40):
        A = _random_dense(rng, rng.randint(0, 5), rng.randint(0, 5), field)
        assert rank(A) == rank(A.transpose())


@pytest.mark.parametrize("field", [GF2, GF3, Q])
def test_column_basis_reconstructs(field):
    rng = random.Random(12)
    for _ in range(40):
        A = _random_dense(rng, rng.randint(1, 5), rng.randint(1, 5), field)
        basis, exp = column_basis(A)
        for j, coeffs in exp.items():
            rebuilt = [field.zero] * A.rows
            for k, coef in zip(basis, coeffs):
                for r in range(A.rows):
                    rebuilt[r] = field.add(rebuilt[r], field.mul(coef, A.entry(r, k)))
            assert rebuilt == A.column(j)


@pytest.mark.parametrize("field", [GF2, GF3, Q])
def test_solve_membership_contract(field):
    rng = random.Random(13)
    for _ in range(60):
        D = _random_dense(rng, rng.randint(1, 5), rng.randint(1, 4), field)
        r = [field.random_element(rng) for _ in range(D.rows)]
        sol = solve_membership(D, r)
        if sol is not None:
            assert matvec(D, sol) == [field.element(x) for x in r]
        else:
            aug = DenseMatrix(field, [D.row(i) + [r[i]] for i in range(D.rows)],
                              cols=D.cols + 1)
            assert rank(aug) == rank(D) + 1


def test_gf2_bitset_matches_generic():
    rng = random.Random(14)
    for _ in range(80):
        rows = [[rng.randrange(2) for _ in range(rng.randint(1, 7))]]
        ncols = len(rows[0])
        for _ in range(rng.randint(0, 6)):
            rows.append([rng.randrange(2) for _ in range(ncols)])
        piv_g, rref_g = _rref_generic(GF2, rows, ncols)
        piv_b, rref_b = _rref_gf2(pack_gf2_rows(rows))
        assert piv_g == piv_b
        packed_g = pack_gf2_rows([rref_g[k] for k in range(len(piv_g))])
        assert packed_g == rref_b


def test_real_tolerance_pivoting():
    R = FieldSpec.real(1e-6)
    A = DenseMatrix(R, [[1e-9, 0.0], [0.0, 1e-9]])
    assert rank(A) == 0
    B = DenseMatrix(R, [[1.0, 1.0], [1.0, 1.0 + 1e-9]])
    assert rank(B) == 1
    C = DenseMatrix(R, [[1.0, 1.0], [1.0, 2.0]])
    assert rank(C) == 2


def test_dense_matrix_shape_errors():
    with pytest.raises(ValueError):
        DenseMatrix(GF2, [[1, 0], [1]])
    with pytest.raises(ValueError):
        matvec(DenseMatrix(GF2, [[1, 0]]), [1])
