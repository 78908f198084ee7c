"""Normal forms and the toroidal-quotient criterion.

The decision procedure is cross-checked against a brute-force box
enumeration oracle, and normalize against exact lattice-equality and
coordinate-change invariance.
"""

import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cousinlab._linalg import field_solve, is_unimodular
from cousinlab.errors import PreconditionError
from cousinlab.number_field import make_field
from cousinlab.period_lattice import (
    CousinCertificate,
    ExactComplex,
    PeriodMatrix,
    is_cousin,
    normalize,
)

I = (0, 1)
H = Fraction(1, 2)


def p_line(alpha, field=None, embedding_index=None):
    """The rank-3 family in C^2: generators (0,1), (1,alpha), (i,0)."""
    return PeriodMatrix(
        [[0]], [[1]], [[alpha]], [[0]], field=field, embedding_index=embedding_index
    )


def rows_line(alpha):
    return [[0, 1, I], [1, alpha, 0]]


@pytest.fixture(scope="module")
def sqrt2_field():
    return make_field([-2, 0, 1])


# ---------------------------------------------------------------------------
# oracles
# ---------------------------------------------------------------------------


def brute_force_violation(R_rows, box):
    """Smallest-box search for nonzero sigma with t(sigma) R integral."""
    k = len(R_rows)
    two_m = len(R_rows[0])
    for total in range(1, k * box + 1):
        for sigma in itertools.product(range(-box, box + 1), repeat=k):
            if sum(abs(s) for s in sigma) != total:
                continue
            vals = [
                sum(Fraction(R_rows[i][c]) * sigma[i] for i in range(k))
                for c in range(two_m)
            ]
            if all(v.denominator == 1 for v in vals):
                return sigma, tuple(-v for v in vals)
    return None


def unpack(z):
    if isinstance(z, ExactComplex):
        return z
    return ExactComplex.from_real(Fraction(z))


def apply_coordinate_change(A_rows, rows):
    """A * P for small matrices given as nested lists of (re, im) pairs."""
    A = [[ExactComplex(Fraction(a), Fraction(b)) for (a, b) in row] for row in A_rows]
    P = [
        [
            z if isinstance(z, ExactComplex) else (
                ExactComplex(Fraction(z[0]), Fraction(z[1]))
                if isinstance(z, tuple)
                else ExactComplex.from_real(Fraction(z))
            )
            for z in row
        ]
        for row in rows
    ]
    n, k = len(P), len(P[0])
    out = []
    for i in range(n):
        row = []
        for j in range(k):
            acc = None
            for t in range(n):
                term = A[i][t] * P[t][j]
                acc = term if acc is None else acc + term
            row.append(acc)
        out.append(row)
    return out


def assert_same_lattice(cols_a, cols_b):
    """Both generating sets span the same subgroup over Z (exact solve)."""

    def stack(cols):
        n = len(cols[0])
        rows = []
        for i in range(n):
            rows.append([c[i].re for c in cols])
        for i in range(n):
            rows.append([c[i].im for c in cols])
        return rows

    def contained(cols_x, cols_y):
        mat = stack(cols_y)
        for col in cols_x:
            rhs = [col[i].re for i in range(len(col))] + [
                col[i].im for i in range(len(col))
            ]
            sol = field_solve(mat, rhs, is_zero=lambda q: q == 0)
            assert sol is not None
            for q in sol:
                assert Fraction(q).denominator == 1

    contained(cols_a, cols_b)
    contained(cols_b, cols_a)


def cols_of(P):
    rows = P.matrix_rows()
    n = len(rows)
    return [tuple(rows[i][j] for i in range(n)) for j in range(len(rows[0]))]


# ---------------------------------------------------------------------------
# PeriodMatrix construction
# ---------------------------------------------------------------------------


class TestPeriodMatrix:
    def test_singular_n_rejected(self):
        with pytest.raises(PreconditionError):
            PeriodMatrix([[0]], [[0]], [[H]], [[0]])

    def test_singular_n_2x2_rejected(self):
        with pytest.raises(PreconditionError):
            PeriodMatrix(
                [[0, 0], [0, 0]], [[1, 2], [2, 4]], [], []
            )

    def test_shape_mismatch(self):
        with pytest.raises(PreconditionError):
            PeriodMatrix([[0]], [[1]], [[H, H]], [[0]])
        with pytest.raises(PreconditionError):
            PeriodMatrix([[0]], [[1]], [[H]], [])

    def test_field_element_needs_field(self, sqrt2_field):
        theta = sqrt2_field.gen()
        with pytest.raises(PreconditionError):
            PeriodMatrix([[0]], [[1]], [[theta]], [[0]])

    def test_embedding_index_range(self, sqrt2_field):
        theta = sqrt2_field.gen()
        with pytest.raises(PreconditionError):
            p_line(theta, field=sqrt2_field, embedding_index=3)
        with pytest.raises(PreconditionError):
            p_line(theta, field=sqrt2_field, embedding_index=0)

    def test_foreign_field_rejected(self, sqrt2_field):
        other = make_field([-3, 0, 1])
        with pytest.raises(PreconditionError):
            p_line(other.gen(), field=sqrt2_field, embedding_index=2)

    def test_r_rows_layout(self):
        P = p_line(H)
        assert P.R_rows() == [[H, Fraction(0)]]
        assert (P.n, P.m) == (2, 1)

    def test_torus_has_empty_r(self):
        P = PeriodMatrix([[0]], [[1]], [], [])
        assert P.R_rows() == []
        assert (P.n, P.m) == (1, 1)


class TestCertificateShape:
    def test_witness_only_when_violated(self):
        with pytest.raises(ValueError):
            CousinCertificate("cousin", sigma=(1,), tau=(0, 0))
        with pytest.raises(ValueError):
            CousinCertificate("not_cousin")
        cert = CousinCertificate("not_cousin", sigma=(2,), tau=(-1, 0))
        assert not cert.is_cousin
        assert cert.to_dict()["sigma"] == [2]


# ---------------------------------------------------------------------------
# is_cousin
# ---------------------------------------------------------------------------


class TestIsCousin:
    def test_half_violated(self):
        cert = is_cousin(p_line(H))
        assert cert.verdict == "not_cousin"
        assert cert.sigma == (2,)
        assert cert.tau == (-1, 0)

    def test_zero_violated(self):
        cert = is_cousin(p_line(0))
        assert cert.verdict == "not_cousin"
        assert cert.sigma == (1,)
        assert cert.tau == (0, 0)

    def test_sqrt2_passes(self, sqrt2_field):
        theta = sqrt2_field.gen()
        cert = is_cousin(p_line(theta, field=sqrt2_field, embedding_index=2))
        assert cert.verdict == "cousin"
        assert cert.sigma is None

    def test_torus_vacuous(self):
        cert = is_cousin(PeriodMatrix([[0]], [[1]], [], []))
        assert cert.is_cousin

    def test_two_row_mixed(self, sqrt2_field):
        theta = sqrt2_field.gen()
        P = PeriodMatrix(
            [[0]],
            [[1]],
            [[Fraction(1, 2)], [theta]],
            [[0], [0]],
            field=sqrt2_field,
            embedding_index=2,
        )
        cert = is_cousin(P)
        assert cert.verdict == "not_cousin"
        assert cert.sigma == (2, 0)
        assert cert.tau == (-1, 0)

    @settings(max_examples=120, deadline=None)
    @given(
        st.lists(
            st.fractions(
                min_value=-3, max_value=3, max_denominator=5
            ),
            min_size=2,
            max_size=2,
        )
    )
    def test_rational_agrees_with_box_oracle(self, entries):
        P = PeriodMatrix([[0]], [[1]], [[entries[0]]], [[entries[1]]])
        cert = is_cousin(P)
        oracle = brute_force_violation(P.R_rows(), 25)
        assert (cert.verdict == "not_cousin") == (oracle is not None)
        if cert.sigma is not None:
            # the returned witness satisfies the exact identity
            R = P.R_rows()
            for c in range(2):
                assert R[0][c] * cert.sigma[0] + cert.tau[c] == 0

    @settings(max_examples=60, deadline=None)
    @given(
        st.lists(
            st.fractions(min_value=-2, max_value=2, max_denominator=4),
            min_size=4,
            max_size=4,
        )
    )
    def test_two_sigma_rows_agree_with_oracle(self, entries):
        P = PeriodMatrix(
            [[0]],
            [[1]],
            [[entries[0]], [entries[1]]],
            [[entries[2]], [entries[3]]],
        )
        cert = is_cousin(P)
        oracle = brute_force_violation(P.R_rows(), 25)
        assert (cert.verdict == "not_cousin") == (oracle is not None)
        if cert.sigma is not None:
            R = P.R_rows()
            for c in range(2):
                val = R[0][c] * cert.sigma[0] + R[1][c] * cert.sigma[1]
                assert val + cert.tau[c] == 0

    @settings(max_examples=60, deadline=None)
    @given(
        st.lists(
            st.fractions(min_value=-2, max_value=2, max_denominator=3),
            min_size=4,
            max_size=4,
        )
    )
    def test_quadratic_entries(self, coords):
        field = make_field([-2, 0, 1])
        r1 = field.element(coords[:2])
        r2 = field.element(coords[2:])
        P = PeriodMatrix(
            [[0]], [[1]], [[r1]], [[r2]], field=field, embedding_index=2
        )
        cert = is_cousin(P)
        irrational = coords[1] != 0 or coords[3] != 0
        assert cert.is_cousin == irrational
        if cert.sigma is not None:
            R = P.R_rows()
            for c in range(2):
                val = R[0][c] * cert.sigma[0]
                assert (val + cert.tau[c]).is_zero()


# ---------------------------------------------------------------------------
# normalize
# ---------------------------------------------------------------------------


SPEC_BLOCKS = p_line(H)


class TestNormalize:
    def test_half_passthrough(self):
        P = normalize(rows_line(H))
        assert P == SPEC_BLOCKS
        assert is_unimodular(P.transform_U)

    def test_torus_identity_embedding(self):
        P = normalize([[1, I]])
        assert P == PeriodMatrix([[0]], [[1]], [], [])

    def test_column_permutations_identical(self):
        base = rows_line(H)
        for perm in itertools.permutations(range(3)):
            rows = [[row[j] for j in perm] for row in base]
            assert normalize(rows) == SPEC_BLOCKS

    def test_unreduced_r_entry(self):
        P = normalize(rows_line(Fraction(3, 2)))
        assert P == SPEC_BLOCKS

    def test_negative_r_entry(self):
        P = normalize(rows_line(Fraction(-1, 2)))
        assert P == SPEC_BLOCKS

    def test_idempotent_on_examples(self):
        for alpha in (H, Fraction(3, 2), Fraction(-7, 3), 0):
            P1 = normalize(rows_line(alpha))
            P2 = normalize(P1.matrix_rows())
            assert P1 == P2

    def test_m2_torus_canonical_sort(self):
        rows = [[1, 0, I, 0], [0, 1, 0, I]]
        P = normalize(rows)
        assert P.M == ((Fraction(0), Fraction(0)), (Fraction(0), Fraction(0)))
        assert P.N == ((Fraction(0), Fraction(1)), (Fraction(1), Fraction(0)))
        assert normalize(P.matrix_rows()) == P

    def test_m2_torus_scrambled(self):
        rows = [[1, 0, I, 0], [0, 1, 0, I]]
        scrambled = apply_coordinate_change([[(1, 0), (0, 1)], [(0, 0), (1, 0)]], rows)
        assert normalize(scrambled) == normalize(rows)

    def test_coordinate_change_invariance(self):
        samples = [
            [[(1, 0), (1, 0)], [(0, 0), (1, 0)]],
            [[(0, 1), (0, 0)], [(0, 0), (1, 0)]],
            [[(2, 1), (0, 0)], [(1, 0), (1, -1)]],
        ]
        for A in samples:
            rows = apply_coordinate_change(A, rows_line(H))
            assert normalize(rows) == SPEC_BLOCKS

    @settings(max_examples=40, deadline=None)
    @given(
        st.lists(st.integers(min_value=-2, max_value=2), min_size=8, max_size=8),
        st.permutations(list(range(3))),
    )
    def test_random_gl2_and_permutation(self, flat, perm):
        A = [
            [(flat[0], flat[1]), (flat[2], flat[3])],
            [(flat[4], flat[5]), (flat[6], flat[7])],
        ]
        a, b = ExactComplex(Fraction(flat[0]), Fraction(flat[1])), ExactComplex(
            Fraction(flat[2]), Fraction(flat[3])
        )
        c, d = ExactComplex(Fraction(flat[4]), Fraction(flat[5])), ExactComplex(
            Fraction(flat[6]), Fraction(flat[7])
        )
        det = a * d - b * c
        if det.is_zero():
            return
        base = rows_line(H)
        permuted = [[row[j] for j in perm] for row in base]
        rows = apply_coordinate_change(A, permuted)
        assert normalize(rows) == SPEC_BLOCKS

    def test_transform_witnesses_lattice_equality(self):
        rows = apply_coordinate_change(
            [[(1, 0), (2, 1)], [(0, 0), (1, 0)]], rows_line(Fraction(5, 2))
        )
        P = normalize(rows)
        assert is_unimodular(P.transform_U)
        # A maps the input lattice onto the lattice of the normal form
        n = len(rows)
        A = P.transform_A
        a_rows = [
            [(Fraction(z.re), Fraction(z.im)) for z in row] for row in A
        ]
        image = apply_coordinate_change(a_rows, rows)
        image_cols = [
            tuple(image[i][j] for i in range(n)) for j in range(len(image[0]))
        ]
        assert_same_lattice(image_cols, cols_of(P))

    def test_sqrt2_entry_reduced(self, sqrt2_field):
        theta = sqrt2_field.gen()
        P = normalize(
            [[0, 1, I], [1, theta, 0]], field=sqrt2_field, embedding_index=2
        )
        expect = p_line(
            theta - 1, field=sqrt2_field, embedding_index=2
        )
        assert P == expect

    def test_sqrt2_reduced_is_verbatim_and_idempotent(self, sqrt2_field):
        theta = sqrt2_field.gen()
        P1 = normalize(
            [[0, 1, I], [1, theta - 1, 0]], field=sqrt2_field, embedding_index=2
        )
        assert P1 == p_line(theta - 1, field=sqrt2_field, embedding_index=2)
        P2 = normalize(
            P1.matrix_rows(), field=sqrt2_field, embedding_index=2
        )
        assert P1 == P2

    def test_sqrt2_scrambled(self, sqrt2_field):
        theta = sqrt2_field.gen()
        rows = [[1, theta, I], [1, theta - 1, 0]]
        P = normalize(rows, field=sqrt2_field, embedding_index=2)
        assert P == p_line(theta - 1, field=sqrt2_field, embedding_index=2)

    def test_cousin_verdict_survives_normalize(self, sqrt2_field):
        theta = sqrt2_field.gen()
        scramble = [[(1, 0), (1, 1)], [(0, 0), (1, 0)]]
        rows = apply_coordinate_change(scramble, rows_line(H))
        assert not is_cousin(normalize(rows)).is_cousin
        # and the irrational variant stays toroidal
        P = normalize(
            [[1, theta, I], [1, theta - 1, 0]],
            field=sqrt2_field,
            embedding_index=2,
        )
        assert is_cousin(P).is_cousin

    def test_rank_deficiency_rejected(self):
        with pytest.raises(PreconditionError):
            normalize([[1, 2, I], [0, 0, 0]])

    def test_proper_complex_span_rejected(self):
        rows = [
            [1, I, 0, 0],
            [0, 0, 1, I],
            [0, 0, 0, 0],
        ]
        with pytest.raises(PreconditionError):
            normalize(rows)

    def test_m_out_of_range(self):
        with pytest.raises(PreconditionError):
            normalize([[1, 2]])  # dependent over R already, but m = 1 <= n
        with pytest.raises(PreconditionError):
            normalize([[1]])  # m = 0
        with pytest.raises(PreconditionError):
            normalize([[1, I, H, Fraction(1, 3)]])  # m = 3 > n = 1

    def test_field_without_embedding_rejected(self, sqrt2_field):
        with pytest.raises(PreconditionError):
            normalize([[1, I]], field=sqrt2_field, embedding_index=None)
