"""Diophantine dispersion measurements for period lattices.

Everything here quantifies how far the integer translates t(sigma) R can
stay from the integer lattice Z^{2m}.  The central quantity is

    d(sigma) = min over tau in Z^{2m} of || t(sigma) R + t(tau) ||

with the Euclidean norm on R^{2m} and |sigma| always meaning the l1 norm;
both conventions are stamped into every report this module emits.

Three levels of rigor coexist and are kept apart deliberately:

* distances d(sigma) are exact (the squared distance is a field element
  or rational) and the reported intervals are certified enclosures;
* Liouville-type certificates carry rational constants C, A proved by the
  algebraic-integer norm inequality |Norm(x)| >= 1, so the stated bound
  C (1+|sigma|)^A is a theorem about the matrix, not an observation;
* scan classifications (strong_consistent / weak_only_consistent /
  liouville_suspect) are least-squares heuristics over record minima and
  say so in their name.  They never override a certificate.

The tower check is the odd one out: it verifies the advertised weak but
not strong dispersion bounds for the tower number alpha = sum 1/u_j,
u_{j+1} = base**u_j, by exact fraction arithmetic on a partial sum plus a
one-grid-step slack argument that absorbs the unmaterializable tail.
"""

import math
from fractions import Fraction

import numpy as np

from .errors import PreconditionError, PrecisionExhausted, ResourceLimit
from .exact_numerics import (
    DEFAULT_PRECISION,
    PRECISION_CAP,
    Interval,
    poly_eval_interval,
)
from .period_lattice import PeriodMatrix, is_cousin, _is_field_elt, _scalar_is_zero

__all__ = [
    "DispersionQuery",
    "DispersionReport",
    "LiouvilleCertificate",
    "ScanRow",
    "dist_to_lattice",
    "dispersion_scan",
    "liouville_certificate",
    "tower_alpha_check",
]

_HALF = Fraction(1, 2)

#: Norm conventions recorded verbatim in every report-like object.
CONVENTIONS = {"vector_norm": "euclidean", "sigma_size": "l1"}

# Certified enclosures for d(sigma) must reach this relative width.
_REL_WIDTH_TARGET = Fraction(1, 2**32)

# Hard cap on enumerated sigma vectors (both signs counted).
_ROW_CAP = 4_000_000

# A record sitting this far (natural log) below the global power-law fit
# marks the scan as liouville_suspect; see _classify.
_SUSPECT_LOG_GAP = 3.0
_MIN_RECORDS_FOR_SUSPECT = 4

# Keep at most this many exact candidates for the min |sigma| d(sigma)
# tie-break; floats preselect, exact comparison decides.
_MIN_SD_CANDIDATES = 64


# -- scalar helpers ----------------------------------------------------------

_root_cache = {}


def _root_iv(field, index, bits):
    key = (field, index, bits)
    iv = _root_cache.get(key)
    if iv is None:
        iv = field.real_roots[index - 1].refine(bits)
        _root_cache[key] = iv
    return iv


def _scalar_interval(x, P, bits):
    if _is_field_elt(x):
        return poly_eval_interval(x.coords, _root_iv(P.field, P.embedding_index, bits))
    return Interval.from_fraction(Fraction(x), bits)


def _scalar_sign(x, P, start_bits=96):
    """Certified sign (-1, 0, +1) of a stored scalar."""
    if not _is_field_elt(x):
        q = Fraction(x)
        return (q > 0) - (q < 0)
    if x.is_zero():
        return 0
    bits = start_bits
    while True:
        s = _scalar_interval(x, P, bits).sign()
        if s is not None:
            return s
        bits *= 2
        if bits > PRECISION_CAP:
            raise PrecisionExhausted("sign refinement stalled", bits)


def _scalar_float(x, theta_float):
    if _is_field_elt(x):
        acc = 0.0
        for c in reversed(x.coords):
            acc = acc * theta_float + c.numerator / c.denominator
        return acc
    return x.numerator / x.denominator


def _frac_log(q):
    """log of a positive Fraction, safe for astronomically small values."""
    return math.log(q.numerator) - math.log(q.denominator)


def _nearest_int_fraction(t):
    """Nearest integer with ties broken toward the even neighbour."""
    n0 = t.numerator // t.denominator
    frac = t - n0
    if frac > _HALF:
        return n0 + 1
    if frac == _HALF:
        return n0 if n0 % 2 == 0 else n0 + 1
    return n0


def _nearest_int_scalar(v, P, start_bits=96):
    """Nearest integer to a stored scalar value, ties toward even.

    Irrational field elements never sit on a half-integer, so interval
    refinement terminates; exact ties exist only on the rational path
    where they are resolved exactly.
    """
    if not _is_field_elt(v):
        return _nearest_int_fraction(Fraction(v))
    if v.is_rational():
        return _nearest_int_fraction(v.as_rational())
    bits = start_bits
    while True:
        iv = _scalar_interval(v, P, bits)
        lo, hi = iv.lo_fraction(), iv.hi_fraction()
        k = _nearest_int_fraction((lo + hi) / 2)
        if lo > k - _HALF and hi < k + _HALF:
            return k
        bits *= 2
        if bits > PRECISION_CAP:
            raise PrecisionExhausted("nearest-integer refinement stalled", bits)


# -- distance to the integer lattice ----------------------------------------


def _check_sigma(P, sigma):
    k = P.n - P.m
    if k == 0:
        raise PreconditionError("matrix has no real rows, so no sigma exists")
    sigma = tuple(sigma)
    if len(sigma) != k or not all(isinstance(x, int) for x in sigma):
        raise PreconditionError(f"sigma must be an integer vector of length {k}")
    if not any(sigma):
        raise PreconditionError("sigma must be nonzero")
    return sigma


def _dist_core(P, sigma):
    """tau, fractional parts e_j = v_j + tau_j, and the exact d^2."""
    R = P.R_rows()
    taus = []
    errs = []
    S = None
    for j in range(2 * P.m):
        v = None
        for i, si in enumerate(sigma):
            if si == 0:
                continue
            term = R[i][j] * si
            v = term if v is None else v + term
        if v is None:
            v = P._zero_scalar()
        t = _nearest_int_scalar(-v, P)
        e = v + t
        taus.append(t)
        errs.append(e)
        sq = e * e
        S = sq if S is None else S + sq
    return tuple(taus), errs, S


def _certified_norm(P, errs, S, start_bits=96):
    """Enclosure of sqrt(sum e_j^2) with relative width <= 2^-32."""
    if _scalar_is_zero(S):
        return Interval.zero(64)
    bits = max(start_bits, 96)
    while True:
        acc = Interval.zero(bits)
        for e in errs:
            acc = acc + _scalar_interval(e, P, bits).sqr()
        d = acc.sqrt()
        rw = d.rel_width()
        if rw is not None and rw <= _REL_WIDTH_TARGET:
            return d
        bits *= 2
        if bits > PRECISION_CAP:
            raise PrecisionExhausted("distance enclosure stalled", bits)


def dist_to_lattice(P, sigma, precision_bits=96):
    """Distance from t(sigma) R to Z^{2m}, with the attaining tau.

    Returns (d, tau) where d is a certified Interval of relative width at
    most 2^-32 (exact zero when t(sigma) R is integral) and tau is the
    nearest integer vector to -t(sigma) R, ties broken toward even.
    Coordinates are independent, so rounding each one attains the
    Euclidean minimum.
    """
    sigma = _check_sigma(P, sigma)
    tau, errs, S = _dist_core(P, sigma)
    return _certified_norm(P, errs, S, precision_bits), tau


# -- sigma enumeration -------------------------------------------------------


def _signed_count(k, budget):
    return sum(math.comb(k, j) * 2**j * math.comb(budget, j) for j in range(1, k + 1))


def _shell(k, rem, prefix=()):
    if len(prefix) == k - 1:
        if rem == 0:
            yield prefix + (0,)
        else:
            yield prefix + (-rem,)
            yield prefix + (rem,)
        return
    for v in range(-rem, rem + 1):
        yield from _shell(k, rem - abs(v), prefix + (v,))


def _canonical_sigmas(k, budget):
    """All sigma with first nonzero entry positive, by (|sigma|, lex).

    d(-sigma) = d(sigma) with tau negated, so one representative per
    antipodal pair carries all the information; mirrors are emitted into
    tables without recomputation.
    """
    for t in range(1, budget + 1):
        for sig in _shell(k, t):
            for x in sig:
                if x > 0:
                    yield sig, t
                    break
                if x < 0:
                    break


# -- scan result containers --------------------------------------------------


class ScanRow:
    __slots__ = ("sigma", "d", "tau")

    def __init__(self, sigma, d, tau):
        self.sigma = sigma
        self.d = d
        self.tau = tau

    def __repr__(self):
        return f"ScanRow(sigma={self.sigma}, d~{float(self.d):.6g}, tau={self.tau})"


class RecordPoint:
    """A running-minimum entry: strictly larger |sigma|, strictly smaller d."""

    __slots__ = ("sigma", "sigma_l1", "d", "d_squared", "tau", "log_d")

    def __init__(self, sigma, sigma_l1, d, d_squared, tau, log_d):
        self.sigma = sigma
        self.sigma_l1 = sigma_l1
        self.d = d
        self.d_squared = d_squared
        self.tau = tau
        self.log_d = log_d


class ModelFit:
    __slots__ = ("slope", "intercept", "rss", "points")

    def __init__(self, slope, intercept, rss, points):
        self.slope = slope
        self.intercept = intercept
        self.rss = rss
        self.points = points

    def to_dict(self):
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "rss": self.rss,
            "points": self.points,
        }


class PerASummary:
    __slots__ = ("a", "inf_log", "inf_value", "argmin_sigma")

    def __init__(self, a, inf_log, inf_value, argmin_sigma):
        self.a = a
        self.inf_log = inf_log
        self.inf_value = inf_value
        self.argmin_sigma = argmin_sigma

    def to_dict(self):
        return {
            "a": str(self.a),
            "inf": self.inf_value,
            "log10_inf": self.inf_log / math.log(10),
            "argmin_sigma": list(self.argmin_sigma),
        }


class DispersionQuery:
    """Scan parameters; a_grid entries must be exact Fractions in (0,1)."""

    def __init__(
        self,
        P,
        sigma_budget,
        a_grid=(),
        precision_bits=96,
        skip_cousin_check=False,
        table_cap=50_000,
    ):
        if not isinstance(P, PeriodMatrix):
            raise PreconditionError("P must be a PeriodMatrix")
        if P.n == P.m:
            raise PreconditionError("matrix has no real rows to scan")
        if not isinstance(sigma_budget, int) or sigma_budget < 1:
            raise PreconditionError("sigma_budget must be an integer >= 1")
        grid = []
        for a in a_grid:
            if isinstance(a, float):
                raise PreconditionError(
                    "a_grid entries must be exact Fractions, not floats"
                )
            a = Fraction(a)
            if not 0 < a < 1:
                raise PreconditionError("a_grid entries must lie strictly in (0,1)")
            grid.append(a)
        if not isinstance(precision_bits, int) or precision_bits < 64:
            raise PreconditionError("precision_bits must be an integer >= 64")
        if not isinstance(table_cap, int) or table_cap < 0:
            raise PreconditionError("table_cap must be a nonnegative integer")
        if _signed_count(P.n - P.m, sigma_budget) > _ROW_CAP:
            raise ResourceLimit(
                f"budget {sigma_budget} enumerates more than {_ROW_CAP} vectors"
            )
        self.P = P
        self.sigma_budget = sigma_budget
        self.a_grid = tuple(grid)
        self.precision_bits = precision_bits
        self.skip_cousin_check = bool(skip_cousin_check)
        self.table_cap = int(table_cap)


class DispersionReport:
    def __init__(self, **kw):
        self.sigma_budget = kw["sigma_budget"]
        self.a_grid = kw["a_grid"]
        self.precision_bits = kw["precision_bits"]
        self.table = kw["table"]
        self.table_truncated = kw["table_truncated"]
        self.row_count = kw["row_count"]
        self.records = kw["records"]
        self.per_a = kw["per_a"]
        self.fit_power = kw["fit_power"]
        self.fit_exponential = kw["fit_exponential"]
        self.classification = kw["classification"]
        self.certificate = kw["certificate"]
        self.zero_witness = kw["zero_witness"]
        self.min_sigma_d = kw["min_sigma_d"]
        self.min_sigma_d_argmin = kw["min_sigma_d_argmin"]
        self.conventions = dict(CONVENTIONS)

    def to_dict(self):
        out = {
            "sigma_budget": self.sigma_budget,
            "a_grid": [str(a) for a in self.a_grid],
            "precision_bits": self.precision_bits,
            "row_count": self.row_count,
            "table_truncated": self.table_truncated,
            "classification": self.classification,
            "conventions": self.conventions,
            "records": [
                {
                    "sigma": list(r.sigma),
                    "sigma_l1": r.sigma_l1,
                    "d_lo": str(r.d.lo_fraction()),
                    "d_hi": str(r.d.hi_fraction()),
                    "d": float(r.d),
                    "tau": list(r.tau),
                }
                for r in self.records
            ],
            "per_a": [p.to_dict() for p in self.per_a],
            "table": [
                {
                    "sigma": list(row.sigma),
                    "d": float(row.d),
                    "d_lo": str(row.d.lo_fraction()),
                    "d_hi": str(row.d.hi_fraction()),
                    "tau": list(row.tau),
                }
                for row in self.table
            ],
        }
        if self.fit_power is not None:
            out["fit_power"] = self.fit_power.to_dict()
        if self.fit_exponential is not None:
            out["fit_exponential"] = self.fit_exponential.to_dict()
        if self.min_sigma_d is not None:
            out["min_sigma_times_d"] = {
                "lo": str(self.min_sigma_d.lo_fraction()),
                "hi": str(self.min_sigma_d.hi_fraction()),
                "value": float(self.min_sigma_d),
                "argmin_sigma": list(self.min_sigma_d_argmin),
            }
        if self.zero_witness is not None:
            out["zero_witness"] = {
                "sigma": list(self.zero_witness[0]),
                "tau": list(self.zero_witness[1]),
            }
        if self.certificate is not None:
            out["certificate"] = self.certificate.to_dict()
        return out


# -- the scan -----------------------------------------------------------------


def _theta_float(P):
    if P.field is None:
        return None
    iv = _root_iv(P.field, P.embedding_index, 64)
    return float(iv.mid_fraction())


def _log_d(P, errs, S, theta_f):
    """Float natural log of d(sigma), from the exact error coordinates.

    Each e_j is evaluated as a float individually: the cancellation that
    makes d small already happened exactly inside e_j, so the float sum
    of squares has small relative error even for very deep minima.
    """
    acc = 0.0
    for e in errs:
        x = _scalar_float(e, theta_f)
        acc += x * x
    if acc > 0.0:
        return 0.5 * math.log(acc)
    # Underflow or degenerate rounding: fall back to the exact square.
    if not _is_field_elt(S):
        return 0.5 * _frac_log(Fraction(S))
    bits = 256
    while True:
        iv = _scalar_interval(S, P, bits)
        if iv.sign() == 1:
            return 0.5 * _frac_log(iv.mid_fraction())
        bits *= 2
        if bits > PRECISION_CAP:
            raise PrecisionExhausted("exact log fallback stalled", bits)


def _scalar_less(x, y, P):
    """Certified x < y for same-kind stored scalars."""
    return _scalar_sign(y - x, P) > 0


def _fit_records(records):
    pts = [(r.sigma_l1, r.log_d) for r in records]
    if len({s for s, _ in pts}) < 2:
        return None, None
    ys = np.array([y for _, y in pts])

    def fit(xs):
        coeffs, diag = np.polyfit(xs, ys, 1, full=True)[:2]
        rss = float(diag[0]) if len(diag) else 0.0
        return ModelFit(float(coeffs[0]), float(coeffs[1]), rss, len(pts))

    return (
        fit(np.log([s for s, _ in pts])),
        fit(np.array([float(s) for s, _ in pts])),
    )


def _classify(records, fit_power, fit_exponential, certificate):
    """Heuristic label for the scanned decay; certificates outrank it."""
    if fit_power is not None and len(records) >= _MIN_RECORDS_FOR_SUSPECT:
        worst = min(
            r.log_d - (fit_power.intercept + fit_power.slope * math.log(r.sigma_l1))
            for r in records
        )
        if worst <= -_SUSPECT_LOG_GAP:
            return "liouville_suspect"
    if fit_power is None or fit_exponential is None:
        # One record: nothing contradicts the polynomial model.
        return "strong_consistent"
    if fit_power.rss <= fit_exponential.rss:
        if certificate is not None and fit_power.slope < certificate.A - 1:
            return "weak_only_consistent"
        return "strong_consistent"
    return "weak_only_consistent"


def dispersion_scan(query):
    """Enumerate all 0 < |sigma| <= budget and measure d(sigma).

    Requires a Cousin matrix unless skip_cousin_check is set; on the skip
    path an exact zero distance stops the scan and the report comes back
    classified "rejected" with the witness.  Record minima, per-a
    empirical constants inf d(sigma)/a^|sigma|, and two least-squares
    decay fits feed the classification heuristic.
    """
    P = query.P
    if not query.skip_cousin_check:
        cert = is_cousin(P)
        if not cert.is_cousin:
            raise PreconditionError(
                "matrix is not Cousin: t(sigma) R is integral for "
                f"sigma={list(cert.sigma)}, tau={list(cert.tau)}"
            )
    k = P.n - P.m
    theta_f = _theta_float(P)
    log_as = [(_frac_log(a), a) for a in query.a_grid]

    table = []
    truncated = False
    row_count = 0
    records = []
    per_a_state = [[math.inf, None] for _ in log_as]
    best_sd = math.inf
    sd_cands = []
    zero_witness = None

    for sig, s in _canonical_sigmas(k, query.sigma_budget):
        tau, errs, S = _dist_core(P, sig)
        row_count += 2
        if _scalar_is_zero(S):
            zero_witness = (sig, tau)
            zero_iv = Interval.zero(64)
            if len(table) + 2 <= query.table_cap:
                table.append(ScanRow(sig, zero_iv, tau))
                table.append(ScanRow(_neg(sig), zero_iv, _neg(tau)))
            else:
                truncated = True
            break
        ld = _log_d(P, errs, S, theta_f)

        d_iv = None
        if len(table) + 2 <= query.table_cap:
            d_iv = _certified_norm(P, errs, S, query.precision_bits)
            table.append(ScanRow(sig, d_iv, tau))
            table.append(ScanRow(_neg(sig), d_iv, _neg(tau)))
        else:
            truncated = True

        if not records or (
            ld < records[-1].log_d - 1e-12
            and _scalar_less(S, records[-1].d_squared, P)
        ):
            if d_iv is None:
                d_iv = _certified_norm(P, errs, S, query.precision_bits)
            records.append(RecordPoint(sig, s, d_iv, S, tau, ld))

        key = ld + math.log(s)
        if key < best_sd - 1e-9:
            best_sd = key
            sd_cands = [(sig, s, S)]
        elif key <= best_sd + 1e-9 and len(sd_cands) < _MIN_SD_CANDIDATES:
            sd_cands.append((sig, s, S))

        for slot, (la, _a) in zip(per_a_state, log_as):
            val = ld - s * la
            if val < slot[0]:
                slot[0] = val
                slot[1] = sig

    if zero_witness is not None:
        report_kw = dict(
            sigma_budget=query.sigma_budget,
            a_grid=query.a_grid,
            precision_bits=query.precision_bits,
            table=tuple(table),
            table_truncated=truncated,
            row_count=row_count,
            records=tuple(records),
            per_a=(),
            fit_power=None,
            fit_exponential=None,
            classification="rejected",
            certificate=None,
            zero_witness=zero_witness,
            min_sigma_d=Interval.zero(64),
            min_sigma_d_argmin=zero_witness[0],
        )
        return DispersionReport(**report_kw)

    # Exact tie-break for min |sigma| d(sigma) among float-close candidates.
    best = sd_cands[0]
    for cand in sd_cands[1:]:
        if _scalar_less(cand[2] * cand[1] ** 2, best[2] * best[1] ** 2, P):
            best = cand
    min_sd = _certified_scaled_norm(P, best[2], best[1], query.precision_bits)

    certificate = None
    if P.field is not None and not query.skip_cousin_check:
        certificate = liouville_certificate(P)

    fit_power, fit_exponential = _fit_records(records)
    classification = _classify(records, fit_power, fit_exponential, certificate)

    per_a = tuple(
        PerASummary(a, slot[0], math.exp(slot[0]), slot[1])
        for (_la, a), slot in zip(log_as, per_a_state)
    )

    return DispersionReport(
        sigma_budget=query.sigma_budget,
        a_grid=query.a_grid,
        precision_bits=query.precision_bits,
        table=tuple(table),
        table_truncated=truncated,
        row_count=row_count,
        records=tuple(records),
        per_a=per_a,
        fit_power=fit_power,
        fit_exponential=fit_exponential,
        classification=classification,
        certificate=certificate,
        zero_witness=None,
        min_sigma_d=min_sd,
        min_sigma_d_argmin=best[0],
    )


def _neg(vec):
    return tuple(-x for x in vec)


def _certified_scaled_norm(P, S, scale, start_bits):
    """Enclosure of scale * sqrt(S) at the report tolerance."""
    bits = max(start_bits, 96)
    while True:
        iv = (_scalar_interval(S, P, bits) * scale**2).sqrt()
        rw = iv.rel_width()
        if rw is not None and rw <= _REL_WIDTH_TARGET:
            return iv
        bits *= 2
        if bits > PRECISION_CAP:
            raise PrecisionExhausted("scaled norm enclosure stalled", bits)


# -- Liouville-type certificates ----------------------------------------------


def _floor_dyadic(q, bits):
    """Largest multiple of 2**-bits at most q, except 0 stays exact."""
    num = (q.numerator << bits) // q.denominator
    return Fraction(num, 1 << bits) if num else q


class LiouvilleCertificate:
    """Proved bound ||t(sigma) R + t(tau)|| >= C (1 + |sigma|)^A.

    C is a positive rational, A = -(degree - 1) a nonpositive integer.
    The proof is the norm inequality: for the first nonzero coordinate
    beta_j of t(sigma) R + t(tau), the algebraic integer D beta_j has
    |Norm| >= 1, and every conjugate of beta_j is at most
    (1 + |sigma|) E_jk once ||.|| <= 1/2 forces |tau_j| into range.
    """

    def __init__(self, C, A, degree, denominator, proof_data, source):
        self.C = C
        self.A = A
        self.degree = degree
        self.denominator = denominator
        self.proof_data = proof_data
        self.source = source
        self.conventions = dict(CONVENTIONS)

    def __repr__(self):
        return f"LiouvilleCertificate(C={self.C}, A={self.A})"

    def bound_at(self, sigma_l1):
        """The certified lower bound at a given |sigma|, as a Fraction."""
        if not isinstance(sigma_l1, int) or sigma_l1 < 1:
            raise PreconditionError("sigma_l1 must be an integer >= 1")
        return self.C * Fraction(1, (1 + sigma_l1) ** (self.degree - 1))

    def strong_constant(self, a):
        """C(a) with ||t(sigma) R + t(tau)|| >= C(a) a^|sigma| for all sigma.

        Returns (C(a), argmin k).  Since the certified bound decays only
        polynomially, C(a) = C * min over k >= 1 of (1+k)^A a^-k; the
        ratio of consecutive terms is increasing, so the first k whose
        successor does not improve is the minimum.
        """
        if isinstance(a, float) or not isinstance(a, (Fraction, int)):
            raise PreconditionError("a must be an exact Fraction")
        a = Fraction(a)
        if not 0 < a < 1:
            raise PreconditionError("a must lie strictly in (0,1)")
        e = self.degree - 1
        inv_a = 1 / a

        def term(k):
            return Fraction(1, (1 + k) ** e) * inv_a**k

        k = 1
        cur = term(k)
        while True:
            nxt = term(k + 1)
            if nxt >= cur:
                return self.C * cur, k
            cur = nxt
            k += 1
            if k > 10**6:
                raise AssertionError("strong-constant minimization ran away")

    def verify_scan(self, sigma_budget, P=None):
        """Exact check d(sigma)^2 (1+|sigma|)^{2(degree-1)} >= C^2.

        Walks one representative of every antipodal sigma pair up to the
        budget (d is even in sigma).  Raises nothing; returns a summary
        dict whose "ok" must be True for a sound certificate.
        """
        P = self.source if P is None else P
        if not isinstance(sigma_budget, int) or sigma_budget < 1:
            raise PreconditionError("sigma_budget must be an integer >= 1")
        C2 = self.C**2
        e2 = 2 * (self.degree - 1)
        checked = 0
        worst = (math.inf, None)
        theta_f = _theta_float(P)
        for sig, s in _canonical_sigmas(P.n - P.m, sigma_budget):
            _tau, errs, S = _dist_core(P, sig)
            lhs = S * (1 + s) ** e2
            if _scalar_sign(lhs - C2, P) < 0:
                return {"ok": False, "checked": checked, "violator": sig}
            checked += 1
            ratio_log = _log_d(P, errs, S, theta_f) + e2 / 2 * math.log1p(s)
            if ratio_log < worst[0]:
                worst = (ratio_log, sig)
        return {
            "ok": True,
            "checked": checked,
            "tightest_sigma": worst[1],
            "min_ratio": math.exp(worst[0]) / float(self.C)
            if worst[1] is not None
            else None,
        }

    def to_dict(self):
        cols = [
            {
                "column": col["column"],
                "E": [str(x) for x in col["E"]],
                "C_j": str(col["C_j"]),
            }
            for col in self.proof_data["columns"]
        ]
        return {
            "C": str(self.C),
            "A": self.A,
            "degree": self.degree,
            "denominator": self.denominator,
            "conventions": self.conventions,
            "proof_data": {
                "denominator": self.proof_data["denominator"],
                "degree": self.proof_data["degree"],
                "embedding_index": self.proof_data["embedding_index"],
                "leading_coefficient": self.proof_data["leading_coefficient"],
                "columns": cols,
                "case_split": self.proof_data["case_split"],
            },
        }


def liouville_certificate(P, bound_bits=128):
    """Issue a Liouville-type lower bound for a Cousin matrix over a field.

    Preconditions: at least one real row, the Cousin property (checked
    exactly, so rational matrices are refused with their witness), and
    number-field entries.  The denominator D is the computed common one:
    c^(d-1) times the lcm of all power-basis coordinate denominators,
    where c is the leading coefficient of the field polynomial (c theta
    is an algebraic integer, so D x is integral for every entry x).
    """
    if P.n == P.m:
        raise PreconditionError("matrix has no real rows, nothing to certify")
    cert = is_cousin(P)
    if not cert.is_cousin:
        raise PreconditionError(
            "matrix is not Cousin: witness "
            f"sigma={list(cert.sigma)}, tau={list(cert.tau)}"
        )
    field = P.field
    if field is None:
        raise PreconditionError("certificate needs number-field entries")
    d = field.degree
    r = P.embedding_index
    R = P.R_rows()
    c_lead = int(field.minpoly[-1])

    dens = [1]
    for row in R:
        for x in row:
            coords = x.coords if _is_field_elt(x) else (Fraction(x),)
            dens.extend(q.denominator for q in coords)
    D = c_lead ** (d - 1) * math.lcm(*dens)

    columns = []
    C = _HALF
    for j in range(2 * P.m):
        col_entries = [row[j] for row in R]
        bounds = []
        for k_emb in range(1, d + 1):
            b = Fraction(0)
            for x in col_entries:
                if _is_field_elt(x):
                    hi = x.embed(k_emb, bound_bits).abs().hi_fraction()
                else:
                    hi = abs(Fraction(x))
                b = max(b, hi)
            bounds.append(b)
        b_real = bounds[r - 1]
        E = [
            max(bounds[k] + b_real, _HALF)
            for k in range(d)
            if k != r - 1
        ]
        prod = Fraction(1)
        for x in E:
            prod *= x
        # Rounding down keeps the bound valid and the constant printable.
        C_j = _floor_dyadic(Fraction(1, D**d) / prod, 96)
        columns.append({"column": j + 1, "E": E, "C_j": C_j})
        C = min(C, C_j)

    proof_data = {
        "denominator": D,
        "degree": d,
        "embedding_index": r,
        "leading_coefficient": c_lead,
        "columns": columns,
        "case_split": (
            "if ||t(sigma)R + t(tau)|| > 1/2 the bound holds because "
            "C <= 1/2 and (1+|sigma|)^A <= 1; otherwise the nonzero "
            "coordinate beta_j has |tau_j| <= |sigma| max|R_j| + 1/2, each "
            "conjugate is at most (1+|sigma|) E_jk, and |Norm(D beta_j)| >= 1"
        ),
    }
    return LiouvilleCertificate(C, -(d - 1), d, D, proof_data, P)


# -- tower alpha ---------------------------------------------------------------

_TOWER_TERM_BIT_CAP = 50_000_000


class TowerReport:
    def __init__(self, **kw):
        self.base = kw["base"]
        self.k_max = kw["k_max"]
        self.u = kw["u"]
        self.q_max = kw["q_max"]
        self.alpha_partial = kw["alpha_partial"]
        self.tail_exponent = kw["tail_exponent"]
        self.checks = kw["checks"]
        self.failures = kw["failures"]
        self.all_weak_ok = kw["all_weak_ok"]
        self.inf_at_first_level = kw["inf_at_first_level"]
        self.strong_chain = kw["strong_chain"]
        self.precision_bits = kw["precision_bits"]
        self.conventions = dict(CONVENTIONS)

    def to_dict(self):
        out = {
            "base": self.base,
            "k_max": self.k_max,
            "u": list(self.u),
            "q_max": self.q_max,
            "alpha_partial": str(self.alpha_partial),
            "tail": f"between {self.base}^-{self.tail_exponent} "
            f"and 2*{self.base}^-{self.tail_exponent}",
            "checked": len(self.checks),
            "failures": [c["q"] for c in self.failures],
            "all_weak_ok": self.all_weak_ok,
            "conventions": self.conventions,
            "precision_bits": self.precision_bits,
            "inf_at_first_level": {
                "q": self.inf_at_first_level["q"],
                "lo": str(self.inf_at_first_level["lo"]),
                "hi": str(self.inf_at_first_level["hi"]),
                "value": float(self.inf_at_first_level["lo"]),
            },
        }
        if self.strong_chain is not None:
            out["strong_chain"] = {
                k: (str(v) if isinstance(v, Fraction) else v)
                for k, v in self.strong_chain.items()
            }
        return out


def _tower_samples(q_max, u, base, sample_count):
    qs = set(range(1, min(q_max, 64) + 1))
    for t in range(1, 33):
        if base * t <= q_max:
            qs.add(base * t)
    for uj in u:
        for q in (uj - 1, uj, uj + 1):
            if 1 <= q <= q_max:
                qs.add(q)
    qs.add(q_max)
    if len(qs) < sample_count and q_max > 64:
        lo = 16.0
        ratio = (q_max / lo) ** (1.0 / max(sample_count - len(qs), 1))
        x = lo
        for _ in range(4 * sample_count):
            x *= ratio
            q = round(x)
            if q > q_max:
                break
            qs.add(q)
            if len(qs) >= sample_count:
                break
    return sorted(qs)


def tower_alpha_check(
    k_max=2,
    q_max=10**6,
    precision_bits=256,
    base=10,
    q_list=None,
    sample_count=1000,
):
    """Verify the weak dispersion bounds for the tower number alpha.

    alpha = sum over j >= 0 of 1/u_j with u_0 = 1, u_{j+1} = base**u_j.
    The partial sum through 1/u_{k_max} is exact; the tail lies strictly
    between base^-u_{k_max} and 2 base^-u_{k_max} and is never
    materialized.  Because every checked quantity is a fraction on the
    grid base^-u_{k_max - 1} (or one level finer for the upper bounds)
    while q * tail is smaller than one grid step -- that is what the
    shallow-tower precondition enforces -- each bound reduces to an exact
    fraction comparison on the partial sum:

      {q alpha} >  base^-u_k        iff  {q alpha_partial} >= base^-u_k
      1-{q alpha} >= (1-1/base) base^-u_k  iff the partial-sum gap
                                           exceeds the bound strictly

    where k is the tower level with u_k <= q < u_{k+1}.  For bases 2 and
    up the lower bounds hold on every level; the upper-bound margin is a
    base-10 digit argument and genuinely fails at base 2 on the k = 0
    shell (positions u_0 = 1 and u_1 = 2 are adjacent), so desk-scale
    runs should start sampling at q = u_1.
    """
    if not isinstance(base, int) or base < 2:
        raise PreconditionError("base must be an integer >= 2")
    if not isinstance(k_max, int) or k_max < 1:
        raise PreconditionError("k_max must be an integer >= 1")
    if not isinstance(q_max, int) or q_max < 1:
        raise PreconditionError("q_max must be an integer >= 1")
    if not isinstance(precision_bits, int) or precision_bits < 32:
        raise PreconditionError("precision_bits must be an integer >= 32")

    u = [1]
    for _ in range(k_max):
        bits_needed = u[-1] * math.log2(base)
        if bits_needed > _TOWER_TERM_BIT_CAP:
            raise PreconditionError(
                f"level-{len(u)} term needs about 2^{bits_needed:.3g} "
                "bits and cannot be materialized; lower k_max"
            )
        u.append(base ** u[-1])
    if q_max >= u[-1]:
        raise PreconditionError(
            f"q_max must stay below u_{k_max} = base**u_{k_max - 1} = {u[-1]}"
        )
    # Tail control: q * tail < base^-(u_{k_max-1} + 1), one step of the
    # finest grid any comparison below lives on.
    margin = (u[-1] - u[-2] - 1) * math.log2(base) - 2
    if math.log2(2 * q_max) > margin:
        raise PreconditionError("tower too shallow to control the tail")

    alpha_partial = sum((Fraction(1, uj) for uj in u), Fraction(0))

    if q_list is None:
        q_list = _tower_samples(q_max, u, base, sample_count)
    else:
        q_list = sorted({int(q) for q in q_list})
        if not q_list or q_list[0] < 1 or q_list[-1] > q_max:
            raise PreconditionError("q_list entries must lie in [1, q_max]")

    checks = []
    failures = []
    for q in q_list:
        k = max(j for j in range(len(u) - 1) if u[j] <= q)
        f = q * alpha_partial
        f -= f.numerator // f.denominator
        assert f > 0, "fractional part vanished below the materialized level"
        lower_bound = Fraction(1, base ** u[k])
        upper_bound = Fraction(base - 1, base ** (u[k] + 1))
        lower_ok = f >= lower_bound
        upper_ok = (1 - f) - upper_bound > 0
        entry = {
            "q": q,
            "level": k,
            "frac": f,
            "lower_bound": lower_bound,
            "lower_ok": lower_ok,
            "upper_gap": 1 - f,
            "upper_bound": upper_bound,
            "upper_ok": upper_ok,
        }
        checks.append(entry)
        if not (lower_ok and upper_ok):
            failures.append(entry)

    # inf over p of |u_1 alpha - p|, enclosed exactly.  delta is the signed
    # offset of the partial value from its nearest integer; the true value
    # adds u_1 * tail > 0, which the margin below keeps under D0 * 10^-8.
    # The tail therefore grows the distance when delta > 0 and shrinks it
    # when delta < 0 (or sits on a half-integer), so the enclosure leans
    # to the matching side of D0.
    q1 = u[1]
    v = q1 * alpha_partial
    delta = v - _nearest_int_fraction(v)
    D0 = abs(delta)
    if D0 == 0:
        raise PreconditionError(
            "first-level distance vanished; k_max must be at least 2"
        )
    inf_margin = math.log2(2 * q1) - _frac_log(D0) / math.log(2) + 8 * math.log2(10)
    if inf_margin > u[-1] * math.log2(base):
        raise PreconditionError("tower too shallow to enclose the first-level inf")
    eps = Fraction(1, 10**8)
    if 0 < delta < _HALF:
        inf_block = {"q": q1, "lo": D0, "hi": D0 * (1 + eps)}
    else:
        inf_block = {"q": q1, "lo": D0 * (1 - eps), "hi": D0}

    strong_chain = None
    if base >= 3:
        mid = Fraction(2 * q1, u[2]) if k_max >= 2 else None
        rhs = Fraction(2**q1, base**q1)
        strong_chain = {
            "two_u1_over_u2": mid,
            "half_base_power": rhs,
            "inf_below_first": mid is not None and inf_block["hi"] < mid,
            "first_below_second": mid is not None and mid < rhs,
            "inf_below_half_base_power": inf_block["hi"] < rhs,
        }
        strong_chain["ok"] = (
            strong_chain["inf_below_first"]
            and strong_chain["first_below_second"]
        )

    return TowerReport(
        base=base,
        k_max=k_max,
        u=tuple(u),
        q_max=q_max,
        alpha_partial=alpha_partial,
        tail_exponent=u[-1],
        checks=checks,
        failures=failures,
        all_weak_ok=not failures,
        inf_at_first_level=inf_block,
        strong_chain=strong_chain,
        precision_bits=precision_bits,
    )
