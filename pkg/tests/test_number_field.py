"""Tests for number fields, embeddings, units, and the log-rank check."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cousinlab.errors import PreconditionError, PrecisionExhausted
from cousinlab.number_field import (
    NumberField,
    embed,
    is_totally_positive,
    is_unit,
    log_rank_check,
    make_field,
)

from _oracles import digits_to_bracket

# frozen with mpmath.polyroots at 45 digits; the plastic field x^3 - x - 1
PLASTIC_REAL = "1.32471795724474602596090885447809734073"
PLASTIC_CPLX_RE = "-0.66235897862237301298045442723904867036"
PLASTIC_CPLX_IM = "0.56227951206230124389918214490937306149"

# x^5 - x - 1, signature (1, 2); upper-half roots sorted by real part
QUINTIC_RES = [
    ("-0.76488443360058472602982318770", "0.35247154603172624931794709140"),
    ("0.18123244446987538390180023778", "1.08395410131771066843034449298"),
]


@pytest.fixture(scope="module")
def plastic():
    return make_field((-1, -1, 0, 1))


@pytest.fixture(scope="module")
def quintic():
    return make_field((-1, -1, 0, 0, 0, 1))


class TestMakeField:
    def test_plastic_signature(self, plastic):
        assert plastic.signature == (1, 1)
        assert plastic.degree == 3

    def test_classic_signatures(self):
        assert make_field((1, 0, 1)).signature == (0, 1)  # x^2 + 1
        assert make_field((-2, 0, 1)).signature == (2, 0)  # x^2 - 2
        assert make_field((-1, -1, 1)).signature == (2, 0)  # x^2 - x - 1

    def test_quintic_signature(self, quintic):
        assert quintic.signature == (1, 2)

    def test_reducible_rejected(self):
        with pytest.raises(PreconditionError):
            make_field((-4, 0, 1))  # (x-2)(x+2)
        with pytest.raises(PreconditionError):
            make_field((0, 1, 1))  # x(x+1)

    def test_degree_one_rejected(self):
        with pytest.raises(PreconditionError):
            make_field((-3, 1))

    def test_content_normalized(self):
        k = make_field((-2, -2, 0, 2))  # 2(x^3 - x - 1)
        assert k.minpoly == (-1, -1, 0, 1)


class TestElementArithmetic:
    def test_generator_satisfies_its_polynomial(self, plastic):
        th = plastic.gen()
        assert th**3 - th - 1 == plastic.zero()

    def test_power_basis_reduction(self, plastic):
        th = plastic.gen()
        # theta^3 = theta + 1, so theta^4 = theta^2 + theta
        assert th**4 == th**2 + th

    def test_coordinates_beyond_degree_reduce(self, plastic):
        # passing theta^3 + theta^4 directly as coordinates
        el = plastic.element([0, 0, 0, 1, 1])
        th = plastic.gen()
        assert el == th**3 + th**4

    @given(
        a=st.lists(st.integers(-5, 5), min_size=3, max_size=3),
        b=st.lists(st.integers(-5, 5), min_size=3, max_size=3),
    )
    @settings(max_examples=80, deadline=None)
    def test_ring_laws(self, a, b):
        k = make_field((-1, -1, 0, 1))
        x, y = k.element(a), k.element(b)
        assert x + y == y + x
        assert x * y == y * x
        assert x * (y + 1) == x * y + x

    def test_inverse_roundtrip(self, plastic):
        th = plastic.gen()
        el = th**2 - 3 * th + 2
        assert el * el.inverse() == plastic.one()

    def test_zero_inverse_refused(self, plastic):
        with pytest.raises(ZeroDivisionError):
            plastic.zero().inverse()

    def test_division(self, plastic):
        th = plastic.gen()
        q = (th**2 + 1) / (th + 2)
        assert q * (th + 2) == th**2 + 1

    def test_cross_field_arithmetic_refused(self, plastic):
        other = make_field((-2, 0, 1))
        with pytest.raises(PreconditionError):
            plastic.gen() + other.gen()


class TestEmbeddings:
    def test_real_embedding_hits_frozen_digits(self, plastic):
        box = embed(plastic.gen(), 1, 160)
        lo, hi = digits_to_bracket(PLASTIC_REAL)
        assert lo < box.re.lo_fraction() and box.re.hi_fraction() < hi
        assert box.im.lo_fraction() == 0 and box.im.hi_fraction() == 0

    def test_complex_embedding_hits_frozen_digits(self, plastic):
        box = embed(plastic.gen(), 2, 160)
        rlo, rhi = digits_to_bracket(PLASTIC_CPLX_RE)
        ilo, ihi = digits_to_bracket(PLASTIC_CPLX_IM)
        assert rlo < box.re.lo_fraction() and box.re.hi_fraction() < rhi
        assert ilo < box.im.lo_fraction() and box.im.hi_fraction() < ihi

    def test_conjugate_embedding_is_exact_mirror(self, plastic):
        th2 = plastic.gen() ** 2 - plastic.gen()
        up = embed(th2, 2, 90)
        down = embed(th2, 3, 90)
        assert up.re.lo_fraction() == down.re.lo_fraction()
        assert up.re.hi_fraction() == down.re.hi_fraction()
        assert up.im.lo_fraction() == -down.im.hi_fraction()
        assert up.im.hi_fraction() == -down.im.lo_fraction()

    def test_rational_element_embeds_as_point(self, plastic):
        box = embed(plastic.from_rational(5), 2, 64)
        assert box.re.contains_fraction(5)
        assert box.re.width_fraction() < Fraction(1, 2**50)
        assert box.im.lo_fraction() == 0 == box.im.hi_fraction()

    def test_width_meets_request(self, plastic):
        for bits in (40, 90, 160):
            box = embed(plastic.gen() + 7, 1, bits)
            assert box.re.width_fraction() <= Fraction(1, 2**bits)

    def test_index_out_of_range(self, plastic):
        with pytest.raises(PreconditionError):
            embed(plastic.gen(), 4)
        with pytest.raises(PreconditionError):
            embed(plastic.gen(), 0)

    def test_quintic_upper_half_order(self, quintic):
        # embeddings 2 and 3 are the upper-half roots sorted by real part
        for idx, (re_s, im_s) in enumerate(QUINTIC_RES, start=2):
            box = embed(quintic.gen(), idx, 80)
            rlo, rhi = digits_to_bracket(re_s)
            ilo, ihi = digits_to_bracket(im_s)
            assert rlo < box.re.lo_fraction() and box.re.hi_fraction() < rhi
            assert ilo < box.im.lo_fraction() and box.im.hi_fraction() < ihi

    def test_norm_is_product_of_embeddings(self, plastic):
        el = plastic.element([2, -1, 1])
        n = el.norm()
        prod = embed(el, 1, 140)
        for i in (2, 3):
            prod = prod * embed(el, i, 140)
        assert prod.re.contains_fraction(n)
        assert prod.im.contains_zero()


class TestNormTraceIntegrality:
    def test_norm_of_generator_matches_constant_term_formula(self, plastic):
        # Norm(theta) = (-1)^d * c0 / cd for minpoly sum c_i x^i
        assert plastic.gen().norm() == Fraction((-1) ** 3 * -1, 1)

    def test_norm_multiplicative(self, plastic):
        th = plastic.gen()
        a = th + 1
        b = th**2 - 2
        assert (a * b).norm() == a.norm() * b.norm()

    def test_norm_of_rational(self, plastic):
        assert plastic.from_rational(Fraction(3, 2)).norm() == Fraction(27, 8)

    def test_norm_against_multiplication_determinant(self, plastic):
        from cousinlab._linalg import field_det

        el = plastic.element([1, 1, -2])
        assert el.norm() == field_det(el.multiplication_matrix())

    def test_trace_of_generator_is_minus_subleading(self, plastic):
        # trace(theta) = -c_{d-1}/c_d = 0 for x^3 - x - 1
        assert plastic.gen().trace() == 0

    def test_integrality(self, plastic):
        th = plastic.gen()
        assert th.is_integral()
        assert (th**2 + 3).is_integral()
        assert not (th / 2).is_integral()
        assert not plastic.from_rational(Fraction(1, 3)).is_integral()


class TestUnits:
    def test_generator_is_unit(self, plastic):
        assert is_unit(plastic.gen())

    def test_unit_powers_and_inverses_stay_units(self, plastic):
        th = plastic.gen()
        assert is_unit(th**2)
        assert is_unit(th.inverse())
        assert is_unit(th**5 * th.inverse() ** 2)

    def test_rational_integers_mostly_not_units(self, plastic):
        assert not is_unit(plastic.from_rational(2))
        assert is_unit(plastic.from_rational(-1))

    def test_non_integral_input_is_an_error(self, plastic):
        with pytest.raises(PreconditionError):
            is_unit(plastic.from_rational(Fraction(1, 2)))

    def test_golden_ratio_unit(self):
        k = make_field((-1, -1, 1))  # x^2 - x - 1
        phi = k.gen()
        assert is_unit(phi)
        assert phi.norm() == -1


class TestTotalPositivity:
    def test_plastic_generator_totally_positive(self, plastic):
        assert is_totally_positive(plastic.gen())

    def test_negative_rational_fails_when_real_places_exist(self, plastic):
        assert not is_totally_positive(plastic.from_rational(-1))

    def test_zero_is_not_totally_positive(self, plastic):
        assert not is_totally_positive(plastic.zero())

    def test_vacuous_when_no_real_places(self):
        k = make_field((1, 0, 1))
        assert is_totally_positive(k.gen())
        assert is_totally_positive(k.from_rational(-7))

    def test_mixed_sign_element(self):
        k = make_field((-2, 0, 1))  # embeddings +-sqrt2
        th = k.gen()
        assert not is_totally_positive(th)  # negative at the -sqrt2 place
        assert is_totally_positive(th * th)  # 2 everywhere
        assert is_totally_positive(th + 2)  # 2 +- sqrt2 > 0

    def test_squares_of_units_always_pass(self, plastic):
        th = plastic.gen()
        for u in (th, th + 1, th**2 - 1):
            assert is_totally_positive(u * u)


class TestLogRankCheck:
    def test_plastic_single_unit(self, plastic):
        assert log_rank_check([plastic.gen()], 1) is True

    def test_ones_give_rank_zero(self, plastic):
        assert log_rank_check([plastic.one()], 1) is False

    def test_unit_powers_still_span_rank_one(self, plastic):
        th = plastic.gen()
        assert log_rank_check([th, th**2], 1) is True

    def test_too_few_generators(self):
        k = make_field((-1, -1, 1))  # s = 2
        phi2 = k.gen() ** 2  # totally positive unit
        assert log_rank_check([phi2], 2) is False

    def test_dependent_columns_undecided_not_false(self):
        # theta^2 and theta^4 have proportional log columns at s = 2; the
        # check must refuse to certify rather than guess either way
        k = make_field((-1, -1, 1))
        u = k.gen() ** 2
        with pytest.raises(PrecisionExhausted):
            log_rank_check([u, u**2], 2, cap_bits=1024)

    def test_rank_two_in_real_quadratic(self):
        # sqrt2 field: s = 2 but unit rank is s + t - 1 = 1, so no set of
        # genuine units can reach rank 2; use the structural short-circuit
        k = make_field((-1, -1, 1))
        phi = k.gen()
        # phi^2 and (1+phi)^2 = phi^2 + 2phi + 1... both TP units
        v = (1 + phi) * (1 + phi)
        got = None
        try:
            got = log_rank_check([phi * phi, v], 2, cap_bits=4096)
        except PrecisionExhausted:
            got = "undecided"
        # (1+phi)^2 = phi^4 means columns are dependent, so True is wrong
        assert got in (False, "undecided")

    def test_non_unit_input_rejected(self, plastic):
        with pytest.raises(PreconditionError):
            log_rank_check([plastic.from_rational(2)], 1)

    def test_non_totally_positive_unit_rejected(self):
        k = make_field((-1, -1, 1))
        assert is_unit(k.gen())
        with pytest.raises(PreconditionError):
            log_rank_check([k.gen()], 2)  # norm -1 unit is not TP

    def test_s_zero_vacuous(self):
        k = make_field((1, 0, 1))
        assert log_rank_check([k.one()], 0) is True
