"""Witness sequences and the exponential cocycles they generate.

A non-compact Cousin group carries obstruction classes built from
frequencies sigma whose row combination t(sigma) R almost meets the
integer lattice.  This module operationalizes that construction in two
independent halves.

The arithmetic half hunts for and certifies witnesses.  A level-k witness
is a frequency sigma with

    || t(sigma) R - t(tau) || < (1/k) a^{|sigma|}

for some integer tau; a ``WitnessSequence`` stores one item per level with
|sigma(k)| strictly increasing and a fixed per-coordinate sign pattern,
and every stored inequality is re-proved exactly at construction time, so
the object is a certificate, not a log.  Hunts against exact data are
short by nature: two witnesses at depths q < q' force q' on the order of
a^-q (otherwise their tau rows would collide), so item depths grow doubly
exponentially and any finite scan budget caps the count at a handful.
``find_witnesses`` reports how its scan ended: every level filled, the
sigma budget ran out, or a Liouville certificate closed the remaining
feasible window and the failure is a theorem.

The analytic half evaluates the cocycle attached to a sequence,

    A_x(lam, z) = sum_k a^{x |sigma(k)|}
                  (e(t(sigma(k)) lam_low) - 1) / eta_sigma(k)
                  e(t(sigma(k)) z_low),          e(t) = exp(2 pi i t),

where eta_sigma = max_j |e(theta_j) - 1| over the coordinates theta_j of
t(sigma) R, and lam_low, z_low are the last n-m coordinates.  The lattice
pairing is computed from exact coordinates, so the vanishing of A_x on
the real generators (columns carrying the identity block of R's side) is
exact, not small.  ``radius_report`` runs the root test on the eta values
to estimate rho = 1 / limsup eta^(-1/|sigma|) and the per-exponent radii
a^-x rho whose strict separation distinguishes the regularity classes.
Because honest scans stop at a few items, the estimator also accepts a
synthetic list of (|sigma|, eta) pairs in place of a scanned sequence.
"""

import cmath
import math
from fractions import Fraction

from .dispersion import (
    LiouvilleCertificate,
    _canonical_sigmas,
    _check_sigma,
    _dist_core,
    _scalar_sign,
)
from .errors import PreconditionError, PrecisionExhausted
from .exact_numerics import (
    DEFAULT_PRECISION,
    PRECISION_CAP,
    Interval,
    sinpi_interval,
)
from .period_lattice import PeriodMatrix, _is_field_elt, _scalar_is_zero, is_cousin

_HALF = Fraction(1, 2)


def _require_fraction_in_unit(value, name):
    if isinstance(value, float) or not isinstance(value, (Fraction, int)):
        raise PreconditionError(f"{name} must be an exact Fraction")
    value = Fraction(value)
    if not 0 < value < 1:
        raise PreconditionError(f"{name} must lie strictly in (0,1)")
    return value


def _int_vector(v, length, name):
    v = tuple(v)
    if len(v) != length or not all(
        isinstance(x, int) and not isinstance(x, bool) for x in v
    ):
        raise PreconditionError(f"{name} must be an integer vector of length {length}")
    return v


def _sign_pattern(sigma):
    # sgn(0) = +1: a zero coordinate never breaks a pattern.
    return tuple(-1 if x < 0 else 1 for x in sigma)


def _matches_pattern(sigma, pattern):
    return all(
        (p == 1 and x >= 0) or (p == -1 and x < 0) for x, p in zip(sigma, pattern)
    )


def _theta_row(P, sigma):
    """The 2m stored scalars of t(sigma) R, exact."""
    R = P.R_rows()
    out = []
    for j in range(2 * P.m):
        v = None
        for i, si in enumerate(sigma):
            if si == 0:
                continue
            term = R[i][j] * si
            v = term if v is None else v + term
        out.append(P._zero_scalar() if v is None else v)
    return out


class WitnessItem:
    """One certified level: (k, sigma, tau) with the inequality re-proved."""

    __slots__ = ("k", "sigma", "tau")

    def __init__(self, k, sigma, tau):
        if not isinstance(k, int) or k < 1:
            raise PreconditionError("witness level k must be an integer >= 1")
        self.k = k
        self.sigma = tuple(sigma)
        self.tau = tuple(tau)

    @property
    def sigma_l1(self):
        return sum(abs(x) for x in self.sigma)

    def to_dict(self):
        return {"k": self.k, "sigma": list(self.sigma), "tau": list(self.tau)}

    def __repr__(self):
        return f"WitnessItem(k={self.k}, sigma={list(self.sigma)}, tau={list(self.tau)})"


class WitnessSequence:
    """Certified witness items over one period matrix.

    Construction re-proves every stored inequality by exact sign
    computation on the squared distance, enforces pairwise-distinct
    frequencies of strictly increasing l1 norm, and checks that all
    frequencies share the sign pattern of the first (a zero coordinate
    counts as +1).  ``verdict`` records how the producing scan ended and
    is "constructed" for hand-built sequences.
    """

    def __init__(self, P, a, items, verdict="constructed", scanned_l1=None):
        if not isinstance(P, PeriodMatrix):
            raise PreconditionError("P must be a PeriodMatrix")
        self.P = P
        self.a = _require_fraction_in_unit(a, "a")
        k = P.n - P.m
        if k == 0:
            raise PreconditionError("matrix has no real rows, so no sigma exists")
        checked = []
        for pos, item in enumerate(items):
            if not isinstance(item, WitnessItem):
                item = WitnessItem(*item)
            if item.k != pos + 1:
                raise PreconditionError(
                    f"witness levels must be consecutive from 1; "
                    f"position {pos} holds k={item.k}"
                )
            sigma = _int_vector(item.sigma, k, "sigma")
            if not any(sigma):
                raise PreconditionError("sigma must be nonzero")
            tau = _int_vector(item.tau, 2 * P.m, "tau")
            checked.append(WitnessItem(item.k, sigma, tau))
        for prev, cur in zip(checked, checked[1:]):
            if cur.sigma_l1 <= prev.sigma_l1:
                raise PreconditionError("|sigma(k)| must increase strictly with k")
        if len({it.sigma for it in checked}) != len(checked):
            raise PreconditionError("witness frequencies must be pairwise distinct")
        self.sign_pattern = _sign_pattern(checked[0].sigma) if checked else ()
        for it in checked:
            if not _matches_pattern(it.sigma, self.sign_pattern):
                raise PreconditionError(
                    f"sigma={list(it.sigma)} breaks the sign pattern "
                    f"{list(self.sign_pattern)} fixed by the first item"
                )
        for it in checked:
            self._certify_item(it)
        self.items = tuple(checked)
        if verdict not in ("constructed", "complete", "exhausted_budget", "capped_by_certificate"):
            raise PreconditionError(f"unknown verdict {verdict!r}")
        self.verdict = verdict
        self.scanned_l1 = scanned_l1
        self._theta_cache = {}
        self._eta_cache = {}

    def _certify_item(self, item):
        # squared distance to the *stored* tau, compared exactly against
        # the squared threshold; both sides are field scalars or rationals.
        thetas = _theta_row(self.P, item.sigma)
        S = None
        for theta, t in zip(thetas, item.tau):
            e = theta - t
            sq = e * e
            S = sq if S is None else S + sq
        if _scalar_is_zero(S):
            raise PreconditionError(
                f"t(sigma) R is exactly integral for sigma={list(item.sigma)}; "
                "the matrix is not Cousin and the frequency is degenerate"
            )
        thr2 = Fraction(1, item.k**2) * self.a ** (2 * item.sigma_l1)
        if _scalar_sign(S - thr2, self.P) >= 0:
            raise PreconditionError(
                f"witness inequality fails at level {item.k}: "
                f"||t({list(item.sigma)}) R - t(tau)|| is not below "
                f"(1/{item.k}) a^{item.sigma_l1}"
            )

    def __len__(self):
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def thetas(self, item):
        key = item.sigma
        if key not in self._theta_cache:
            self._theta_cache[key] = _theta_row(self.P, item.sigma)
        return self._theta_cache[key]

    def eta(self, item, bits=DEFAULT_PRECISION):
        key = (item.sigma, bits)
        if key not in self._eta_cache:
            self._eta_cache[key] = eta_sigma(self.P, item.sigma, bits)
        return self._eta_cache[key]

    def to_dict(self):
        return {
            "a": str(self.a),
            "sign_pattern": list(self.sign_pattern),
            "verdict": self.verdict,
            "scanned_l1": self.scanned_l1,
            "items": [it.to_dict() for it in self.items],
        }

    def __repr__(self):
        return (
            f"WitnessSequence({len(self.items)} items, a={self.a}, "
            f"verdict={self.verdict!r})"
        )


def eta_sigma(P, sigma, bits=DEFAULT_PRECISION):
    """max_j |exp(2 pi i (t(sigma) R)_j) - 1| as a certified Interval.

    |e(theta) - 1| = 2 sin(pi dist(theta, Z)), so the maximum runs over
    the per-coordinate distances.  Exactly integral coordinates give an
    exact zero factor and half-integral ones give exactly 2; otherwise
    the enclosure comes from interval sine at ``bits``.  Frequencies with
    t(sigma) R fully integral return the exact zero interval, which is
    precisely the non-Cousin degeneracy.
    """
    sigma = _check_sigma(P, sigma)
    thetas = _theta_row(P, sigma)
    best = None
    for theta in thetas:
        # reduce to the fractional distance |e| <= 1/2 exactly
        if _is_field_elt(theta) and not theta.is_rational():
            bb = bits
            while True:
                iv = P.entry_interval(theta, bb)
                lo, hi = iv.lo_fraction(), iv.hi_fraction()
                n = math.floor((lo + hi) / 2 + _HALF)
                if lo > n - _HALF and hi < n + _HALF:
                    break
                bb *= 2
                if bb > PRECISION_CAP:
                    raise PrecisionExhausted("eta enclosure stalled", bb)
            dist = abs(iv - n)
            cand = sinpi_interval(dist) * 2
        else:
            q = theta.as_rational() if _is_field_elt(theta) else Fraction(theta)
            frac = q - math.floor(q)
            d = min(frac, 1 - frac)
            if d == 0:
                cand = Interval.zero(bits)
            elif d == _HALF:
                cand = Interval.from_fraction(2, bits)
            else:
                cand = sinpi_interval(Interval.from_fraction(d, bits)) * 2
        if best is None:
            best = cand
        else:
            # max of two nonnegative enclosures
            best = Interval.from_endpoints(
                max(best.lo_fraction(), cand.lo_fraction()),
                max(best.hi_fraction(), cand.hi_fraction()),
                bits,
            )
    return best


def _feasible(k, l1, a, certificate):
    """Can a level-k witness exist at depth l1, given the certificate?"""
    return Fraction(1, k) * a**l1 > certificate.bound_at(l1)


def _tail_closed(k, budget, a, certificate):
    """Exact proof that no level-k witness exists at any depth > budget.

    The threshold-to-bound ratio picks up a factor
    a ((l+2)/(l+1))^(degree-1) per step, which is itself decreasing in l,
    so infeasibility at budget+1 plus ratio <= 1 there closes the tail.
    """
    e = certificate.degree - 1
    if _feasible(k, budget + 1, a, certificate):
        return False
    return a * Fraction(budget + 3, budget + 2) ** e <= 1


def find_witnesses(P, a, k_max, sigma_budget, certificate=None):
    """Scan for a witness sequence, level by level, with exact verdicts.

    Preconditions: P is Cousin (checked; the refusal carries the
    degenerate sigma), a is an exact Fraction in (0,1), and the optional
    certificate was issued for this very matrix.  The scan walks one
    representative per antipodal frequency pair in (|sigma|, lex) order
    up to l1 norm ``sigma_budget``, accepts the first frequency whose
    exact squared distance beats the level threshold, and then moves to
    the next level at strictly greater depth.  The first accepted item
    fixes the sign pattern; later candidates may match it with either
    orientation of the pair.

    The returned sequence's verdict is "complete" when all k_max levels
    filled, "capped_by_certificate" when the certificate closes every
    remaining feasible depth (that failure is a theorem about the
    matrix), and "exhausted_budget" otherwise.  Failure to reach k_max
    is an expected outcome, not an error: consecutive witness depths
    grow like a^-|sigma|, so most honest scans stop early.
    """
    if not isinstance(P, PeriodMatrix):
        raise PreconditionError("P must be a PeriodMatrix")
    a = _require_fraction_in_unit(a, "a")
    if not isinstance(k_max, int) or k_max < 1:
        raise PreconditionError("k_max must be an integer >= 1")
    if not isinstance(sigma_budget, int) or sigma_budget < 1:
        raise PreconditionError("sigma_budget must be an integer >= 1")
    if certificate is not None:
        if not isinstance(certificate, LiouvilleCertificate):
            raise PreconditionError("certificate must be a LiouvilleCertificate")
        if certificate.source is not P and certificate.source != P:
            raise PreconditionError("certificate was issued for a different matrix")
    cousin = is_cousin(P)
    if not cousin.is_cousin:
        raise PreconditionError(
            "matrix is not Cousin: t(sigma) R is integral for "
            f"sigma={list(cousin.sigma)}, tau={list(cousin.tau)}"
        )

    nm = P.n - P.m
    items = []
    pattern = None
    k = 1
    start_l1 = 1
    verdict = "complete"
    while k <= k_max:
        if certificate is not None:
            window = [
                l1
                for l1 in range(start_l1, sigma_budget + 1)
                if _feasible(k, l1, a, certificate)
            ]
            closed = _tail_closed(k, sigma_budget, a, certificate)
        else:
            window = list(range(start_l1, sigma_budget + 1))
            closed = False
        hit = None
        wset = set(window)
        for sig, l1 in _canonical_sigmas(nm, sigma_budget):
            if l1 < start_l1 or l1 not in wset:
                continue
            cand = None
            if pattern is None:
                cand = sig
            elif _matches_pattern(sig, pattern):
                cand = sig
            else:
                neg = tuple(-x for x in sig)
                if _matches_pattern(neg, pattern):
                    cand = neg
            if cand is None:
                continue
            tau, _errs, S = _dist_core(P, cand)
            thr2 = Fraction(1, k**2) * a ** (2 * l1)
            if _scalar_sign(S - thr2, P) < 0:
                hit = (cand, tuple(-t for t in tau), l1)
                break
        if hit is None:
            verdict = "capped_by_certificate" if closed else "exhausted_budget"
            break
        sig, tau, l1 = hit
        items.append(WitnessItem(k, sig, tau))
        if pattern is None:
            pattern = _sign_pattern(sig)
        start_l1 = l1 + 1
        k += 1
    return WitnessSequence(P, a, items, verdict=verdict, scanned_l1=sigma_budget)


# -- cocycle evaluation -------------------------------------------------------


def _scalar_is_integer(x):
    if _is_field_elt(x):
        if not x.is_rational():
            return False
        return x.as_rational().denominator == 1
    return Fraction(x).denominator == 1


def lattice_vector(P, coords):
    """The point of C^n with the given integer lattice coordinates.

    Columns follow the stored normal form: the first n-m carry the
    identity block in the real rows, the next m the torus identity, the
    last m the (M + iN, R2) pairs.  Floating point; exact questions about
    lattice points go through the stored scalars instead.
    """
    coords = _int_vector(coords, P.n + P.m, "coords")
    m, n = P.m, P.n
    head, mid, tail = coords[: n - m], coords[n - m : n], coords[n:]
    z = []
    for i in range(m):
        acc = complex(mid[i])
        for j in range(m):
            acc += tail[j] * complex(
                float(P.entry_interval(P.M[i][j], 64)),
                float(P.entry_interval(P.N[i][j], 64)),
            )
        z.append(acc)
    for i in range(n - m):
        acc = complex(head[i])
        for j in range(m):
            acc += mid[j] * float(P.entry_interval(P.R1[i][j], 64))
            acc += tail[j] * float(P.entry_interval(P.R2[i][j], 64))
        z.append(acc)
    return tuple(z)


def evaluate_cocycle(x, lam, z, witnesses, K_max=None):
    """Truncated cocycle value A_x(lam, z) and its reported tail bound.

    ``lam`` is an integer coordinate vector of length n+m; ``z`` a point
    of C^n whose last n-m coordinates have positive imaginary part (the
    normalized domain for the stored all-nonnegative frequencies).  The
    value sums the first K_max items; the second return slot bounds
    everything omitted, namely l1(lam) a^{x(L+1)} / (1 - a^x) with L the
    deepest summed |sigma|, which dominates the skipped items and any
    infinite continuation because depths increase strictly.

    The lattice pairing in the middle factor is exact: when
    t(sigma) lam_low is an integer, as it is for every real-row
    generator, the term contributes an exact zero.
    """
    if not isinstance(witnesses, WitnessSequence):
        raise PreconditionError("witnesses must be a WitnessSequence")
    if isinstance(x, Fraction):
        xf = float(x)
    elif isinstance(x, (int, float)):
        xf = float(x)
    else:
        raise PreconditionError("x must be a real number")
    if not 0 < xf < 1:
        raise PreconditionError("x must lie strictly in (0,1)")
    P = witnesses.P
    if not witnesses.items:
        raise PreconditionError("witness sequence has no items")
    if K_max is None:
        K_max = len(witnesses.items)
    if not isinstance(K_max, int) or not 1 <= K_max <= len(witnesses.items):
        raise PreconditionError("K_max must satisfy 1 <= K_max <= len(witnesses)")
    m, n = P.m, P.n
    lam = _int_vector(lam, n + m, "lam")
    z = tuple(z)
    if len(z) != n:
        raise PreconditionError(f"z must have {n} complex coordinates")
    z = tuple(complex(w) for w in z)
    for w in z[m:]:
        if not w.imag > 0:
            raise PreconditionError(
                "z lies outside the domain: the last n-m coordinates "
                "need positive imaginary part"
            )
    af = float(witnesses.a)
    mid_coeffs = lam[n - m : n + m]  # pair against the 2m columns of R
    value = 0.0 + 0.0j
    for item in witnesses.items[:K_max]:
        thetas = witnesses.thetas(item)
        u = None
        for c, theta in zip(mid_coeffs, thetas):
            if c == 0:
                continue
            term = theta * c
            u = term if u is None else u + term
        if u is None or _scalar_is_integer(u):
            continue  # exact zero term
        uf = float(P.entry_interval(u, 64))
        numerator = cmath.exp(2j * math.pi * uf) - 1.0
        eta_f = float(witnesses.eta(item))
        sig_n = [abs(s) for s in item.sigma]  # normalized frequencies
        phase = sum(s * w for s, w in zip(sig_n, z[m:]))
        value += (
            af ** (xf * item.sigma_l1)
            * (numerator / eta_f)
            * cmath.exp(2j * math.pi * phase)
        )
    L = witnesses.items[K_max - 1].sigma_l1
    l1_lam = sum(abs(c) for c in lam)
    tail = l1_lam * af ** (xf * (L + 1)) / (1.0 - af**xf)
    return value, tail


# -- radius estimation --------------------------------------------------------


class CocycleReport:
    """Root-test summary: eta values, rho estimate, per-exponent radii."""

    __slots__ = ("a", "xs", "eta_values", "rho_estimate", "radii", "separation_ok")

    def __init__(self, a, xs, eta_values, rho_estimate, radii, separation_ok):
        self.a = a
        self.xs = xs
        self.eta_values = eta_values
        self.rho_estimate = rho_estimate
        self.radii = radii
        self.separation_ok = separation_ok

    def to_dict(self):
        def iv(v):
            return {"lo": str(v.lo_fraction()), "hi": str(v.hi_fraction())}

        return {
            "a": str(self.a),
            "xs": [str(x) for x in self.xs],
            "eta_values": [iv(e) for e in self.eta_values],
            "rho_estimate": iv(self.rho_estimate),
            "radii": [iv(r) for r in self.radii],
            "separation_ok": self.separation_ok,
        }

    def __repr__(self):
        rho = float(self.rho_estimate)
        return f"CocycleReport(rho~{rho:.6g}, radii={len(self.radii)}, separation_ok={self.separation_ok})"


def radius_report(xs, witnesses, a=None, bits=DEFAULT_PRECISION):
    """Estimate rho and the radii a^-x rho by the root test.

    ``witnesses`` is either a WitnessSequence (eta values are computed
    and certified from its matrix) or, because honest scans rarely reach
    the depth an estimator wants, a synthetic list of (|sigma|, eta)
    pairs with strictly increasing integer depths and exact positive eta;
    the synthetic form requires ``a`` explicitly.  At least ten items
    are needed for the spread to mean anything.

    The estimate takes eta^(1/|sigma|) over the last five items; the
    reported interval spans their union, so it is an approximation of the
    limsup from below with an error bar, not a certificate.  Radii are
    a^-x times that interval.  ``separation_ok`` records whether
    consecutive radii are disjoint beyond the error bars; a single
    exponent is trivially separated.  Estimated radii must certifiably
    stay below 1, and their point estimates must increase with x; both
    are theorems for true witness data, so their numeric failure means
    the data cannot support a radius estimate at all.
    """
    xs = tuple(xs)
    if not xs:
        raise PreconditionError("xs must be nonempty")
    xs_f = []
    for x in xs:
        if isinstance(x, float) or not isinstance(x, (Fraction, int)):
            raise PreconditionError("each x must be an exact Fraction in (0,1)")
        x = Fraction(x)
        if not 0 < x < 1:
            raise PreconditionError("each x must be an exact Fraction in (0,1)")
        xs_f.append(x)
    if any(y <= x for x, y in zip(xs_f, xs_f[1:])):
        raise PreconditionError("xs must increase strictly")

    if isinstance(witnesses, WitnessSequence):
        if a is not None and Fraction(a) != witnesses.a:
            raise PreconditionError("a disagrees with the witness sequence")
        a = witnesses.a
        pairs = [(it.sigma_l1, witnesses.eta(it, bits)) for it in witnesses.items]
    else:
        if a is None:
            raise PreconditionError("synthetic witness data needs an explicit a")
        a = _require_fraction_in_unit(a, "a")
        pairs = []
        last = 0
        for l1, eta in witnesses:
            if not isinstance(l1, int) or l1 <= last:
                raise PreconditionError(
                    "synthetic depths must be strictly increasing integers"
                )
            last = l1
            if isinstance(eta, Interval):
                iv = eta
            else:
                if isinstance(eta, float):
                    raise PreconditionError("synthetic eta must be exact, not float")
                iv = Interval.from_fraction(Fraction(eta), bits)
            if not iv.is_positive():
                raise PreconditionError("synthetic eta must be certifiably positive")
            pairs.append((l1, iv))
    if len(pairs) < 10:
        raise PreconditionError(
            f"too few witness items for a radius estimate: {len(pairs)} < 10"
        )
    for _l1, iv in pairs:
        if not iv.is_positive():
            raise PreconditionError(
                "an eta enclosure touches zero; the frequency is degenerate"
            )

    roots = [(iv.log() / l1).exp() for l1, iv in pairs]
    tail5 = roots[-5:]
    rho = tail5[0]
    for r in tail5[1:]:
        rho = rho.union(r)

    a_iv = Interval.from_fraction(a, bits)
    log_a = a_iv.log()
    radii = []
    for x in xs_f:
        scale = (log_a * (-x)).exp()  # a^-x
        radii.append(scale * rho)
    for r in radii:
        if not r.hi_fraction() < 1:
            raise PreconditionError(
                "estimated radius not certifiably below 1; the witness data "
                "is too shallow to carry a radius estimate"
            )
    mids = [r.mid_fraction() for r in radii]
    if any(b <= a_ for a_, b in zip(mids, mids[1:])):
        raise PreconditionError("radius point estimates fail to increase with x")
    separation_ok = all(
        upper.lo_fraction() > lower.hi_fraction()
        for lower, upper in zip(radii, radii[1:])
    )
    return CocycleReport(
        a=a,
        xs=tuple(xs_f),
        eta_values=tuple(iv for _l1, iv in pairs),
        rho_estimate=rho,
        radii=tuple(radii),
        separation_ok=separation_ok,
    )
