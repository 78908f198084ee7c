"""Witness hunting, eta values, cocycle evaluation, radius estimation.

The designed line fixture encodes the continued fraction
[0; 2, 12, 8947847 + sqrt2]: a quadratic irrational whose convergent
denominators 1, 2, 25 were placed so that the level thresholds
(1/k) (1/2)^|sigma| are beaten at sigma = 1, 2, 25 and provably nowhere
else within any desk-sized budget (the next convergent denominator is
about 2.2e8).  Expected items, tau values, and eta windows below were
computed independently with Fraction arithmetic on that closed form
before the module existed.
"""

import json
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cousinlab.cocycle_probe import (
    CocycleReport,
    WitnessItem,
    WitnessSequence,
    eta_sigma,
    evaluate_cocycle,
    find_witnesses,
    lattice_vector,
    radius_report,
)
from cousinlab.dispersion import dist_to_lattice, liouville_certificate
from cousinlab.errors import PreconditionError
from cousinlab.exact_numerics import pi_interval
from cousinlab.number_field import make_field
from cousinlab.period_lattice import PeriodMatrix

HALF = Fraction(1, 2)

# denominator of the designed quadratic irrational (q3 * gamma head product)
DESIGNED_DEN = 50039979604414079
DESIGNED_NUM = 24019190219066605


@pytest.fixture(scope="module")
def sqrt2_field():
    return make_field([-2, 0, 1])


@pytest.fixture(scope="module")
def sqrt2_line(sqrt2_field):
    return PeriodMatrix(
        [[0]], [[1]], [[sqrt2_field.gen()]], [[0]],
        field=sqrt2_field, embedding_index=2,
    )


@pytest.fixture(scope="module")
def sqrt2_cert(sqrt2_line):
    return liouville_certificate(sqrt2_line)


@pytest.fixture(scope="module")
def designed_line(sqrt2_field):
    alpha = sqrt2_field.element(
        [Fraction(DESIGNED_NUM, DESIGNED_DEN), Fraction(-1, DESIGNED_DEN)]
    )
    return PeriodMatrix(
        [[0]], [[1]], [[alpha]], [[0]], field=sqrt2_field, embedding_index=2
    )


@pytest.fixture(scope="module")
def designed_seq(designed_line):
    return find_witnesses(designed_line, HALF, 5, 100)


@pytest.fixture(scope="module")
def half_line():
    return PeriodMatrix([[0]], [[1]], [[HALF]], [[0]])


def domain_point(rng):
    return (
        complex(rng.uniform(-1, 1), rng.uniform(-1, 1)),
        complex(rng.uniform(-1, 1), rng.uniform(0.2, 1.0)),
    )


class TestEtaSigma:
    def test_half_integral_coordinate_is_exactly_two(self, half_line):
        e = eta_sigma(half_line, (1,))
        assert e.lo_fraction() == 2 and e.hi_fraction() == 2

    def test_integral_row_is_exactly_zero(self, half_line):
        e = eta_sigma(half_line, (2,))
        assert e.lo_fraction() == 0 and e.hi_fraction() == 0

    def test_zero_sigma_refused(self, half_line):
        with pytest.raises(PreconditionError):
            eta_sigma(half_line, (0,))

    def test_wrong_length_refused(self, half_line):
        with pytest.raises(PreconditionError):
            eta_sigma(half_line, (1, 1))

    def test_designed_values(self, designed_line):
        # 2 sin(pi d) for d = 0.48..., 0.04, 4.47035e-9
        e1 = float(eta_sigma(designed_line, (1,)))
        e2 = float(eta_sigma(designed_line, (2,)))
        e25 = float(eta_sigma(designed_line, (25,)))
        assert abs(e1 - 1.996053) < 1e-5
        assert abs(e2 - 0.250666) < 1e-5
        assert 2.8087e-8 < e25 < 2.8089e-8

    def test_negation_symmetric(self, designed_line):
        a = eta_sigma(designed_line, (7,))
        b = eta_sigma(designed_line, (-7,))
        assert abs(float(a) - float(b)) < 1e-20

    def test_multirow_takes_coordinate_maximum(self, sqrt2_field):
        th = sqrt2_field.gen()
        P = PeriodMatrix(
            [[0]], [[1]], [[th], [th * Fraction(1, 3)]], [[0], [0]],
            field=sqrt2_field, embedding_index=2,
        )
        both = eta_sigma(P, (1, 1))
        assert both.is_positive()
        d, _tau = dist_to_lattice(P, (1, 1))
        two_pi = pi_interval(96) * 2
        assert both.hi_fraction() <= (two_pi * d).hi_fraction()

    @settings(max_examples=60, deadline=None)
    @given(data=st.data())
    def test_bounded_by_two_pi_distance(self, sqrt2_line, data):
        s = data.draw(st.integers(min_value=-400, max_value=400).filter(bool))
        e = eta_sigma(sqrt2_line, (s,))
        d, _tau = dist_to_lattice(sqrt2_line, (s,))
        two_pi = pi_interval(96) * 2
        assert e.hi_fraction() <= (two_pi * d).hi_fraction()
        assert e.hi_fraction() <= 2


class TestWitnessSequence:
    def test_find_output_revalidates(self, designed_line, designed_seq):
        # rebuilding from the raw triples re-proves every inequality
        triples = [(it.k, it.sigma, it.tau) for it in designed_seq.items]
        rebuilt = WitnessSequence(designed_line, HALF, triples)
        assert rebuilt.verdict == "constructed"
        assert rebuilt.sign_pattern == (1,)
        assert [it.sigma for it in rebuilt.items] == [(1,), (2,), (25,)]

    def test_levels_must_be_consecutive(self, designed_line):
        with pytest.raises(PreconditionError, match="consecutive"):
            WitnessSequence(designed_line, HALF, [(2, (1,), (0, 0))])

    def test_depths_must_increase(self, designed_line):
        items = [(1, (2,), (1, 0)), (2, (1,), (0, 0))]
        with pytest.raises(PreconditionError, match="increase strictly"):
            WitnessSequence(designed_line, HALF, items)

    def test_inequality_is_reproved(self, sqrt2_line):
        # d(1) = 0.414... is not below (1/1) (1/4)^1
        with pytest.raises(PreconditionError, match="witness inequality"):
            WitnessSequence(sqrt2_line, Fraction(1, 4), [(1, (1,), (1, 0))])

    def test_integral_frequency_is_degenerate(self, half_line):
        with pytest.raises(PreconditionError, match="not Cousin"):
            WitnessSequence(half_line, HALF, [(1, (2,), (1, 0))])

    def test_sign_pattern_locked_by_first_item(self, sqrt2_field):
        th = sqrt2_field.gen()
        P = PeriodMatrix(
            [[0]], [[1]], [[th], [th * th + th]], [[0], [0]],
            field=sqrt2_field, embedding_index=2,
        )
        items = [(1, (1, 1), (3, 0)), (2, (1, -2), (-4, 0))]
        with pytest.raises(PreconditionError, match="sign pattern"):
            WitnessSequence(P, Fraction(99, 100), items)

    def test_float_a_refused(self, designed_line):
        with pytest.raises(PreconditionError, match="exact Fraction"):
            WitnessSequence(designed_line, 0.5, [])

    def test_tau_length_checked(self, designed_line):
        with pytest.raises(PreconditionError, match="tau"):
            WitnessSequence(designed_line, HALF, [(1, (1,), (0,))])

    def test_unknown_verdict_refused(self, designed_line):
        with pytest.raises(PreconditionError, match="verdict"):
            WitnessSequence(designed_line, HALF, [], verdict="great_success")

    def test_to_dict_round_trips_through_json(self, designed_seq):
        blob = json.loads(json.dumps(designed_seq.to_dict()))
        assert blob["a"] == "1/2"
        assert blob["verdict"] == "exhausted_budget"
        assert [it["sigma"] for it in blob["items"]] == [[1], [2], [25]]


class TestFindWitnesses:
    def test_designed_line_items(self, designed_seq):
        got = [(it.k, it.sigma, it.tau) for it in designed_seq.items]
        assert got == [
            (1, (1,), (0, 0)),
            (2, (2,), (1, 0)),
            (3, (25,), (12, 0)),
        ]
        assert designed_seq.verdict == "exhausted_budget"
        assert designed_seq.scanned_l1 == 100

    def test_designed_line_completes_at_three(self, designed_line):
        ws = find_witnesses(designed_line, HALF, 3, 30)
        assert ws.verdict == "complete"
        assert len(ws.items) == 3

    def test_designed_line_small_budget(self, designed_line):
        ws = find_witnesses(designed_line, HALF, 5, 20)
        assert ws.verdict == "exhausted_budget"
        assert [it.sigma for it in ws.items] == [(1,), (2,)]

    def test_sqrt2_tenth_scan(self, sqrt2_line):
        ws = find_witnesses(sqrt2_line, Fraction(9, 10), 12, 60)
        assert [it.sigma for it in ws.items] == [(1,), (2,), (3,), (5,), (12,)]
        assert ws.verdict == "exhausted_budget"

    def test_sqrt2_tenth_scan_certificate_caps(self, sqrt2_line, sqrt2_cert):
        ws = find_witnesses(sqrt2_line, Fraction(9, 10), 12, 60, certificate=sqrt2_cert)
        assert [it.sigma for it in ws.items] == [(1,), (2,), (3,), (5,), (12,)]
        assert ws.verdict == "capped_by_certificate"

    def test_sqrt2_half_certificate_caps_immediately(self, sqrt2_line, sqrt2_cert):
        ws = find_witnesses(sqrt2_line, HALF, 5, 30, certificate=sqrt2_cert)
        assert ws.verdict == "capped_by_certificate"
        assert [(it.k, it.sigma) for it in ws.items] == [(1, (1,))]

    def test_paper_eta_bound_on_items(self, designed_seq):
        two_pi_lo = (pi_interval(96) * 2).lo_fraction()
        for it in designed_seq.items:
            eta = designed_seq.eta(it)
            assert eta.hi_fraction() < two_pi_lo * HALF**it.sigma_l1

    def test_rational_line_refused_with_witness(self, half_line):
        with pytest.raises(PreconditionError, match="not Cousin.*sigma"):
            find_witnesses(half_line, HALF, 3, 10)

    def test_float_a_refused(self, designed_line):
        with pytest.raises(PreconditionError, match="exact Fraction"):
            find_witnesses(designed_line, 0.5, 3, 10)

    def test_foreign_certificate_refused(self, designed_line, sqrt2_cert):
        with pytest.raises(PreconditionError, match="different matrix"):
            find_witnesses(designed_line, HALF, 3, 10, certificate=sqrt2_cert)

    def test_bad_budgets_refused(self, designed_line):
        with pytest.raises(PreconditionError):
            find_witnesses(designed_line, HALF, 0, 10)
        with pytest.raises(PreconditionError):
            find_witnesses(designed_line, HALF, 3, 0)


class TestEvaluateCocycle:
    def test_real_generator_vanishes_exactly(self, designed_seq):
        rng = random.Random(7)
        for _ in range(10):
            z = domain_point(rng)
            for x in (0.25, 0.5, 0.75):
                value, _tail = evaluate_cocycle(x, (1, 0, 0), z, designed_seq)
                assert value == 0j

    def test_zero_lattice_vector(self, designed_seq):
        value, tail = evaluate_cocycle(0.5, (0, 0, 0), (0.1j + 0.2, 0.3j), designed_seq)
        assert value == 0j and tail == 0.0

    def test_generic_value_obeys_term_bounds(self, designed_seq):
        rng = random.Random(11)
        a = 0.5
        for _ in range(20):
            lam = tuple(rng.randint(-4, 4) for _ in range(3))
            z = domain_point(rng)
            x = rng.choice((0.25, 0.5, 0.75))
            value, tail = evaluate_cocycle(x, lam, z, designed_seq)
            l1 = sum(abs(c) for c in lam)
            cap = l1 * sum(a ** (x * it.sigma_l1) for it in designed_seq.items)
            assert abs(value) <= cap + 1e-12
            assert tail >= 0

    def test_truncation_decreases_tail_and_changes_value_boundedly(self, designed_seq):
        z = (0.2 + 0.5j, -0.1 + 0.3j)
        lam = (0, 2, -1)
        prev = None
        for K in (1, 2, 3):
            value, tail = evaluate_cocycle(0.5, lam, z, designed_seq, K_max=K)
            if prev is not None:
                pv, pt = prev
                step = 0.5 ** (0.5 * designed_seq.items[K - 1].sigma_l1)
                assert abs(value - pv) <= 3 * step + 1e-12
                assert tail < pt
            prev = (value, tail)

    def test_cocycle_identity_within_tail(self, designed_line, designed_seq):
        rng = random.Random(3)
        for _ in range(50):
            lam1 = tuple(rng.randint(-3, 3) for _ in range(3))
            lam2 = tuple(rng.randint(-3, 3) for _ in range(3))
            z = domain_point(rng)
            shift = lattice_vector(designed_line, lam2)
            z2 = tuple(u + v for u, v in zip(z, shift))
            lam12 = tuple(u + v for u, v in zip(lam1, lam2))
            a12, t12 = evaluate_cocycle(0.5, lam12, z, designed_seq)
            a1, t1 = evaluate_cocycle(0.5, lam1, z2, designed_seq)
            a2, t2 = evaluate_cocycle(0.5, lam2, z, designed_seq)
            assert abs(a12 - a1 - a2) <= t12 + t1 + t2 + 1e-9

    def test_domain_enforced(self, designed_seq):
        with pytest.raises(PreconditionError, match="outside the domain"):
            evaluate_cocycle(0.5, (1, 0, 0), (0.1j, 0.5 - 0.1j), designed_seq)
        with pytest.raises(PreconditionError, match="outside the domain"):
            evaluate_cocycle(0.5, (1, 0, 0), (0.1j, 0.5 + 0j), designed_seq)

    def test_exponent_range_enforced(self, designed_seq):
        z = (0.1j, 0.5 + 0.2j)
        for bad in (0, 1, -0.5, 2.0):
            with pytest.raises(PreconditionError, match="x must lie"):
                evaluate_cocycle(bad, (1, 0, 0), z, designed_seq)

    def test_k_max_and_lengths_enforced(self, designed_seq):
        z = (0.1j, 0.5 + 0.2j)
        with pytest.raises(PreconditionError, match="K_max"):
            evaluate_cocycle(0.5, (1, 0, 0), z, designed_seq, K_max=4)
        with pytest.raises(PreconditionError, match="K_max"):
            evaluate_cocycle(0.5, (1, 0, 0), z, designed_seq, K_max=0)
        with pytest.raises(PreconditionError, match="lam"):
            evaluate_cocycle(0.5, (1, 0), z, designed_seq)
        with pytest.raises(PreconditionError, match="coordinates"):
            evaluate_cocycle(0.5, (1, 0, 0), (0.5 + 0.2j,), designed_seq)

    def test_empty_sequence_refused(self, sqrt2_line):
        empty = WitnessSequence(sqrt2_line, Fraction(1, 100), [])
        with pytest.raises(PreconditionError, match="no items"):
            evaluate_cocycle(0.5, (1, 0, 0), (0.1j, 0.5 + 0.2j), empty)


def synthetic_pairs(a, count):
    return [(k, a**k) for k in range(1, count + 1)]


class TestRadiusReport:
    def test_exact_geometric_etas_hit_closed_form(self):
        xs = (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4))
        rep = radius_report(xs, synthetic_pairs(HALF, 12), a=HALF)
        for x, r in zip(xs, rep.radii):
            target = 0.5 ** (1 - float(x))
            assert abs(float(r) - target) / target < 1e-12
        assert rep.separation_ok
        assert rep.rho_estimate.lo_fraction() <= HALF <= rep.rho_estimate.hi_fraction()

    def test_two_exponent_example(self):
        rep = radius_report((Fraction(1, 4), Fraction(3, 4)), synthetic_pairs(HALF, 10), a=HALF)
        assert abs(float(rep.radii[0]) - 0.5946035575013605) < 1e-12
        assert abs(float(rep.radii[1]) - 0.8408964152537145) < 1e-12

    def test_single_exponent_trivially_separated(self):
        rep = radius_report((HALF,), synthetic_pairs(HALF, 10), a=HALF)
        assert rep.separation_ok
        assert len(rep.radii) == 1

    def test_radii_increase_with_x(self):
        xs = tuple(Fraction(i, 10) for i in range(1, 10))
        rep = radius_report(xs, synthetic_pairs(Fraction(2, 3), 11), a=Fraction(2, 3))
        vals = [float(r) for r in rep.radii]
        assert vals == sorted(vals)
        assert all(v < 1 for v in vals)

    def test_jittered_etas_lose_separation(self):
        # alternating eta multipliers give the last five roots an 11%
        # spread, far beyond the 2% gap between the two radii
        a = HALF
        pairs = [(k, a**k if k % 2 else a**k * Fraction(1, 3)) for k in range(1, 13)]
        rep = radius_report((Fraction(49, 100), Fraction(51, 100)), pairs, a=a)
        assert not rep.separation_ok

    def test_too_few_items(self):
        with pytest.raises(PreconditionError, match="too few"):
            radius_report((HALF,), synthetic_pairs(HALF, 9), a=HALF)

    def test_real_scan_is_honestly_too_shallow(self, designed_seq):
        # three items is the honest yield of an exact scan; the
        # estimator refuses rather than extrapolate
        with pytest.raises(PreconditionError, match="too few"):
            radius_report((HALF,), designed_seq)

    def test_depths_must_increase(self):
        pairs = synthetic_pairs(HALF, 10)
        pairs[4] = (4, pairs[4][1])
        with pytest.raises(PreconditionError, match="strictly increasing"):
            radius_report((HALF,), pairs, a=HALF)

    def test_float_eta_refused(self):
        pairs = [(k, 0.5**k) for k in range(1, 11)]
        with pytest.raises(PreconditionError, match="exact"):
            radius_report((HALF,), pairs, a=HALF)

    def test_synthetic_needs_a(self):
        with pytest.raises(PreconditionError, match="explicit a"):
            radius_report((HALF,), synthetic_pairs(HALF, 10))

    def test_vanishing_eta_refused(self):
        pairs = synthetic_pairs(HALF, 10)
        pairs[9] = (10, Fraction(0))
        with pytest.raises(PreconditionError, match="positive"):
            radius_report((HALF,), pairs, a=HALF)

    def test_exploding_etas_cannot_carry_estimate(self):
        pairs = [(k, Fraction(3) ** k) for k in range(1, 11)]
        with pytest.raises(PreconditionError, match="below 1"):
            radius_report((HALF,), pairs, a=HALF)

    def test_xs_validation(self):
        pairs = synthetic_pairs(HALF, 10)
        with pytest.raises(PreconditionError, match="nonempty"):
            radius_report((), pairs, a=HALF)
        with pytest.raises(PreconditionError, match="increase strictly"):
            radius_report((HALF, HALF), pairs, a=HALF)
        with pytest.raises(PreconditionError, match="exact Fraction"):
            radius_report((0.5,), pairs, a=HALF)
        with pytest.raises(PreconditionError, match="in \\(0,1\\)"):
            radius_report((Fraction(3, 2),), pairs, a=HALF)

    def test_report_serializes(self):
        rep = radius_report((HALF,), synthetic_pairs(HALF, 10), a=HALF)
        blob = json.loads(json.dumps(rep.to_dict()))
        assert blob["a"] == "1/2"
        assert blob["separation_ok"] is True
        assert len(blob["eta_values"]) == 10
        assert "rho" in repr(rep) or "CocycleReport" in repr(rep)


class TestProperties:
    @settings(max_examples=40, deadline=None)
    @given(data=st.data())
    def test_geometric_etas_estimate_a_for_any_ratio(self, data):
        num = data.draw(st.integers(min_value=1, max_value=9))
        a = Fraction(num, 10)
        rep = radius_report((HALF,), synthetic_pairs(a, 10), a=a)
        assert rep.rho_estimate.lo_fraction() <= a <= rep.rho_estimate.hi_fraction()

    @settings(max_examples=30, deadline=None)
    @given(data=st.data())
    def test_witness_items_certify_under_weaker_levels(self, designed_line, designed_seq, data):
        # dropping trailing items always leaves a valid sequence
        cut = data.draw(st.integers(min_value=0, max_value=len(designed_seq.items)))
        triples = [(it.k, it.sigma, it.tau) for it in designed_seq.items[:cut]]
        rebuilt = WitnessSequence(designed_line, HALF, triples)
        assert len(rebuilt.items) == cut
