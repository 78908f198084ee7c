"""Tests for the exact linear algebra core."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cousinlab._linalg import (
    field_det,
    field_inv,
    field_kernel,
    field_rank,
    field_rref,
    field_solve,
    identity_matrix,
    int_det,
    integer_kernel,
    integer_kernel_of_rational,
    is_unimodular,
    mat_mul,
    mat_vec,
    smith_normal_form,
)

small_ints = st.integers(min_value=-9, max_value=9)


def int_matrices(max_n=4, max_m=4):
    return st.integers(1, max_n).flatmap(
        lambda n: st.integers(1, max_m).flatmap(
            lambda m: st.lists(
                st.lists(small_ints, min_size=m, max_size=m), min_size=n, max_size=n
            )
        )
    )


class TestSmithNormalForm:
    @given(A=int_matrices())
    @settings(max_examples=150, deadline=None)
    def test_factorization_and_unimodularity(self, A):
        U, D, V = smith_normal_form(A)
        assert mat_mul(mat_mul(U, A), V) == D
        assert is_unimodular(U)
        assert is_unimodular(V)

    @given(A=int_matrices())
    @settings(max_examples=150, deadline=None)
    def test_diagonal_divisibility_chain(self, A):
        _, D, _ = smith_normal_form(A)
        n, m = len(D), len(D[0])
        diag = [D[i][i] for i in range(min(n, m))]
        for i in range(n):
            for j in range(m):
                if i != j:
                    assert D[i][j] == 0
        for a, b in zip(diag, diag[1:]):
            if a == 0:
                assert b == 0
            else:
                assert b % a == 0
        assert all(d >= 0 for d in diag)

    def test_known_diagonal(self):
        # classic example: [[2,4,4],[-6,6,12],[10,-4,-16]] has SNF diag (2,6,12)
        A = [[2, 4, 4], [-6, 6, 12], [10, -4, -16]]
        _, D, _ = smith_normal_form(A)
        assert [D[i][i] for i in range(3)] == [2, 6, 12]


class TestIntegerKernel:
    @given(A=int_matrices())
    @settings(max_examples=150, deadline=None)
    def test_kernel_vectors_annihilate(self, A):
        for v in integer_kernel(A):
            assert mat_vec(A, v) == [0] * len(A)
            assert any(v)  # basis vectors are nonzero

    def test_kernel_dimension_matches_rank_deficiency(self):
        A = [[1, 2, 3], [2, 4, 6]]  # rank 1, kernel dim 2
        k = integer_kernel(A)
        assert len(k) == 2

    def test_full_rank_square_matrix_has_no_kernel(self):
        assert integer_kernel([[2, 1], [1, 1]]) == []

    def test_rational_entries_same_kernel_as_scaled(self):
        A = [[Fraction(1, 2), Fraction(1, 3)], [Fraction(3, 2), Fraction(1)]]
        ker = integer_kernel_of_rational(A)
        for v in ker:
            assert all(
                sum(Fraction(row[j]) * v[j] for j in range(2)) == 0 for row in A
            )

    def test_kernel_is_saturated(self):
        # x + 2y = 0 over Z: kernel generated by (2, -1), not (4, -2)
        ker = integer_kernel([[1, 2]])
        assert len(ker) == 1
        v = ker[0]
        from math import gcd

        assert gcd(v[0], v[1]) == 1


class TestIntDet:
    @given(A=int_matrices(3, 3).filter(lambda A: len(A) == len(A[0])))
    @settings(max_examples=100, deadline=None)
    def test_matches_fraction_elimination(self, A):
        d1 = int_det(A)
        d2 = field_det([[Fraction(x) for x in row] for row in A])
        assert d1 == d2

    def test_identity(self):
        assert int_det(identity_matrix(5)) == 1


class TestFieldElimination:
    def frac(self, rows):
        return [[Fraction(x) for x in row] for row in rows]

    def test_rref_idempotent(self):
        A = self.frac([[1, 2, 3], [4, 5, 6], [7, 8, 9]])
        R, pivots, _ = field_rref(A)
        R2, pivots2, _ = field_rref(R)
        assert R == R2 and pivots == pivots2

    def test_rank_of_rank_deficient(self):
        A = self.frac([[1, 2, 3], [4, 5, 6], [7, 8, 9]])
        assert field_rank(A) == 2

    @given(A=int_matrices(4, 4))
    @settings(max_examples=100, deadline=None)
    def test_rank_bounded_by_shape(self, A):
        F = self.frac(A)
        r = field_rank(F)
        assert 0 <= r <= min(len(A), len(A[0]))

    def test_solve_consistent_system(self):
        A = self.frac([[2, 1], [1, 3]])
        b = [Fraction(5), Fraction(10)]
        x = field_solve(A, b)
        assert mat_vec(A, x) == b

    def test_solve_underdetermined_returns_some_solution(self):
        A = self.frac([[1, 1, 1]])
        b = [Fraction(6)]
        x = field_solve(A, b)
        assert sum(x) == 6

    def test_solve_inconsistent_returns_none(self):
        A = self.frac([[1, 1], [2, 2]])
        b = [Fraction(1), Fraction(3)]
        assert field_solve(A, b) is None

    @given(A=int_matrices(3, 3).filter(lambda A: len(A) == len(A[0])))
    @settings(max_examples=100, deadline=None)
    def test_inverse_roundtrip(self, A):
        F = self.frac(A)
        inv = field_inv(F)
        if field_det(F) == 0:
            assert inv is None
        else:
            n = len(A)
            assert mat_mul(F, inv) == self.frac(identity_matrix(n))

    def test_kernel_vectors_annihilate(self):
        A = self.frac([[1, 2, 3], [4, 5, 6]])
        basis = field_kernel(A)
        assert len(basis) == 1
        assert mat_vec(A, basis[0]) == [Fraction(0), Fraction(0)]

    def test_det_multiplicative_on_example(self):
        A = self.frac([[2, 1], [1, 1]])
        B = self.frac([[0, 3], [5, 7]])
        assert field_det(mat_mul(A, B)) == field_det(A) * field_det(B)

    def test_works_over_custom_scalar(self):
        # a scalar that refuses implicit float coercion, to prove the
        # elimination never leaves exact arithmetic
        class Q:
            __slots__ = ("v",)

            def __init__(self, v):
                self.v = Fraction(v)

            def __add__(self, o):
                return Q(self.v + o.v)

            def __sub__(self, o):
                return Q(self.v - o.v)

            def __mul__(self, o):
                return Q(self.v * o.v)

            def __truediv__(self, o):
                return Q(self.v / o.v)

            def __eq__(self, o):
                return isinstance(o, Q) and self.v == o.v

            def __float__(self):
                raise AssertionError("float coercion attempted")

        A = [[Q(2), Q(1)], [Q(1), Q(3)]]
        assert field_rank(A, is_zero=lambda q: q.v == 0) == 2
        d = field_det(A, is_zero=lambda q: q.v == 0)
        assert d.v == 5
