"""The dbar calculus on truncated character spaces of a toroidal quotient.

Everything here lives over a single period matrix in normal form.  Each
integer triple (pi, rho, sigma) names a character gamma of the group, and
dbar acts on the span of gamma dz_I dzbar_J diagonally: wedging with the
vector

    a = (1/2) ((t(pi) - t(sigma) R1) + i (t(rho) - t(pi) M + t(sigma) (R1 M - R2)) N^{-1})

times 2 pi i.  The vector is exact (Fraction or field-element parts), so
closedness, the contraction homotopy, and cohomology ranks are decided
with no tolerance at all.  Powers of the transcendental prefactor 2 pi i
are carried as a separate integer on each form and never numerically
expanded.

Sign conventions, fixed once:

* forms are stored as coefficients of dz_I wedge dzbar_J with I and J
  strictly increasing;
* dbar inserts dzbar_j from the left, so a term picks up
  (-1)^(p + #{j' in J : j' < j});
* the homotopy contracts in position k of J with (-1)^(p + k), k counted
  from zero, against the functional lambda(dzbar_j) = conj(a_j)/||a||^2
  divided by 2 pi i.

With these choices, dbar of the homotopy plus the homotopy of dbar gives
back the form exactly on every nonzero character; that identity is the
property the whole module is built around.  The conjugation in lambda
matters: the unconjugated variant stays reachable through a switch so
its failure can be demonstrated rather than asserted.
"""

import itertools
import math
from fractions import Fraction

import numpy as np

from ._linalg import field_inv, field_rank
from ._schema import decode_int, decode_int_vector, decode_scalar, encode_scalar
from .errors import PreconditionError, PrecisionExhausted, SchemaError
from .exact_numerics import PRECISION_CAP, Interval
from .number_field import FieldElement
from .period_lattice import (
    ExactComplex,
    PeriodMatrix,
    _scalar_is_zero,
    is_cousin,
)

_HALF = Fraction(1, 2)


def _cx_zero_like(P):
    z = P._zero_scalar()
    return ExactComplex(z, z)


def _scalar_sign(P, x, start_bits=96):
    """Certified sign of a stored scalar, escalating precision as needed."""
    if isinstance(x, Fraction):
        return (x > 0) - (x < 0)
    if x.is_zero():
        return 0
    bits = start_bits
    while True:
        iv = P.entry_interval(x, bits)
        s = iv.sign()
        if s is not None:
            return s
        if bits >= PRECISION_CAP:
            raise PrecisionExhausted("sign undecided", cap_bits=bits)
        bits = min(2 * bits, PRECISION_CAP)


# ---------------------------------------------------------------------------
# characters and their a-vectors
# ---------------------------------------------------------------------------


class CharIndex:
    """Integer triple (pi, rho, sigma) naming one character.

    pi and rho have length m, sigma has length n - m.  Instances are
    immutable and hashable so they can key coefficient maps.
    """

    __slots__ = ("pi", "rho", "sigma")

    def __init__(self, pi, rho, sigma):
        pi = tuple(pi)
        rho = tuple(rho)
        sigma = tuple(sigma)
        for name, vec in (("pi", pi), ("rho", rho), ("sigma", sigma)):
            for x in vec:
                if isinstance(x, bool) or not isinstance(x, int):
                    raise ValueError(f"{name} must contain plain integers")
        if len(pi) != len(rho):
            raise ValueError("pi and rho must have equal length")
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "sigma", sigma)

    def __setattr__(self, name, value):
        raise AttributeError("CharIndex is immutable")

    def is_zero(self):
        return not any(self.pi) and not any(self.rho) and not any(self.sigma)

    def sigma_l1(self):
        return sum(abs(s) for s in self.sigma)

    def key(self):
        return (self.sigma, self.pi, self.rho)

    def __eq__(self, other):
        if not isinstance(other, CharIndex):
            return NotImplemented
        return (
            self.pi == other.pi
            and self.rho == other.rho
            and self.sigma == other.sigma
        )

    def __hash__(self):
        return hash((self.pi, self.rho, self.sigma))

    def __repr__(self):
        return f"CharIndex(pi={self.pi}, rho={self.rho}, sigma={self.sigma})"


def _check_idx_shape(P, idx):
    if len(idx.pi) != P.m or len(idx.sigma) != P.n - P.m:
        raise ValueError(
            f"character shape ({len(idx.pi)}, {len(idx.sigma)}) does not match "
            f"a lattice with m={P.m}, n-m={P.n - P.m}"
        )


class AVector:
    """Exact diagonal vector of one character.

    ``entries`` holds m ExactComplex values and ``norm_sq`` the exact
    squared euclidean norm, a Fraction or a field element.  The vector
    vanishes for the zero character; for any other character a vanishing
    vector hands back the integer witness (sigma, tau) proving the
    lattice is not Cousin.
    """

    __slots__ = ("idx", "entries", "norm_sq")

    def __init__(self, idx, entries, norm_sq):
        self.idx = idx
        self.entries = tuple(entries)
        self.norm_sq = norm_sq

    def is_zero(self):
        return all(e.is_zero() for e in self.entries)

    def cousin_witness(self):
        """(sigma, tau) with t(sigma) R + t(tau) = 0, when the vector
        vanishes for a nonzero character; None otherwise."""
        if self.idx.is_zero() or not self.is_zero():
            return None
        tau = tuple(-x for x in (self.idx.pi + self.idx.rho))
        return (self.idx.sigma, tau)

    def __repr__(self):
        return f"AVector({self.idx!r}, entries={self.entries!r})"


def _row_times_matrix(row, matrix):
    cols = len(matrix[0]) if matrix else 0
    out = []
    for c in range(cols):
        acc = None
        for r, x in enumerate(row):
            term = x * matrix[r][c]
            acc = term if acc is None else acc + term
        out.append(acc)
    return out


def _int_row_times_matrix(ints, matrix, zero, width):
    """t(v) A for an integer vector v; the zero rows case still yields
    a row of the requested width."""
    out = [zero] * width
    for r, k in enumerate(ints):
        if k == 0:
            continue
        row = matrix[r]
        for c in range(width):
            out[c] = out[c] + row[c] * k
    return out


def _mat_mul_exact(A, B):
    if not A or not B:
        return []
    return [_row_times_matrix(row, B) for row in A]


def _ninv(P):
    inv = field_inv([list(row) for row in P.N], is_zero=_scalar_is_zero)
    if inv is None:  # PeriodMatrix already rejects singular N
        raise PreconditionError("N block is singular")
    return inv


def _a_vector_given_ninv(P, idx, ninv):
    m = P.m
    zero = P._zero_scalar()
    sR1 = _int_row_times_matrix(idx.sigma, P.R1, zero, m)
    x = [pi_j - v for pi_j, v in zip(idx.pi, sR1)]
    piM = _int_row_times_matrix(idx.pi, P.M, zero, m)
    sR1M = _row_times_matrix(sR1, P.M)
    sR2 = _int_row_times_matrix(idx.sigma, P.R2, zero, m)
    ypre = [r - pm + sm - s2 for r, pm, sm, s2 in zip(idx.rho, piM, sR1M, sR2)]
    y = _row_times_matrix(ypre, ninv)
    entries = [ExactComplex(xj * _HALF, yj * _HALF) for xj, yj in zip(x, y)]
    norm_sq = zero
    for e in entries:
        norm_sq = norm_sq + e.re * e.re + e.im * e.im
    return AVector(idx, entries, norm_sq)


def a_vector(P, idx):
    """The exact diagonal vector of character ``idx`` on lattice ``P``."""
    if not isinstance(P, PeriodMatrix):
        raise ValueError("P must be a PeriodMatrix")
    _check_idx_shape(P, idx)
    return _a_vector_given_ninv(P, idx, _ninv(P))


# ---------------------------------------------------------------------------
# truncated (p, q)-forms
# ---------------------------------------------------------------------------


def _check_subset(indices, upper, size, name):
    t = tuple(indices)
    if len(t) != size:
        raise ValueError(f"{name} must have {size} indices, got {t}")
    prev = 0
    for x in t:
        if isinstance(x, bool) or not isinstance(x, int) or not 1 <= x <= upper:
            raise ValueError(f"{name} entries must be integers in 1..{upper}")
        if x <= prev:
            raise ValueError(f"{name} must be strictly increasing")
        prev = x
    return t


def _coerce_coeff(c):
    if isinstance(c, ExactComplex):
        return c
    if isinstance(c, (int, Fraction, FieldElement)):
        return ExactComplex.from_real(c)
    raise ValueError(
        "coefficients must be ExactComplex, Fraction, int, or field elements"
    )


class FourierPQForm:
    """A finitely supported (p, q)-form on character space.

    ``coeffs`` maps (CharIndex, I, J) to the ExactComplex coefficient of
    gamma dz_I dzbar_J, with I inside {1..n} of size p and J inside
    {1..m} of size q.  Antiholomorphic directions exist only along the
    torus factor, hence the cap on J.  The degree q may formally equal
    m + 1, naming the zero space dbar lands in at top degree; no term
    can live there.

    ``twopii_power`` counts the factors of 2 pi i multiplying the whole
    form.  dbar raises it by one, the homotopy lowers it, and the
    transcendental constant never touches the exact coefficients.
    """

    __slots__ = ("p", "q", "n", "m", "coeffs", "twopii_power")

    def __init__(self, p, q, n, m, coeffs=None, twopii_power=0):
        for name, v in (("p", p), ("q", q), ("n", n), ("m", m)):
            if isinstance(v, bool) or not isinstance(v, int):
                raise ValueError(f"{name} must be an integer")
        if not 1 <= m <= n:
            raise ValueError("need 1 <= m <= n")
        if not 0 <= p <= n or not 0 <= q <= m + 1:
            raise ValueError("degrees out of range: need 0 <= p <= n, 0 <= q <= m+1")
        if isinstance(twopii_power, bool) or not isinstance(twopii_power, int):
            raise ValueError("twopii_power must be an integer")
        self.p = p
        self.q = q
        self.n = n
        self.m = m
        self.twopii_power = twopii_power
        store = {}
        for key, c in (coeffs or {}).items():
            idx, I, J = key
            if not isinstance(idx, CharIndex):
                raise ValueError("coefficient keys start with a CharIndex")
            if len(idx.pi) != m or len(idx.sigma) != n - m:
                raise ValueError("character shape does not match (n, m)")
            I = _check_subset(I, n, p, "I")
            J = _check_subset(J, m, q, "J")
            c = _coerce_coeff(c)
            if c.is_zero():
                continue
            k = (idx, I, J)
            if k in store:
                raise ValueError(f"duplicate coefficient key {k}")
            store[k] = c
        self.coeffs = store

    def terms(self):
        """Deterministically ordered (key, coefficient) pairs."""
        return sorted(
            self.coeffs.items(), key=lambda kv: (kv[0][0].key(), kv[0][1], kv[0][2])
        )

    def is_zero(self):
        return not self.coeffs

    def characters(self):
        return {idx for idx, _, _ in self.coeffs}

    def _compatible(self, other):
        return isinstance(other, FourierPQForm) and (
            (self.p, self.q, self.n, self.m) == (other.p, other.q, other.n, other.m)
        )

    def __add__(self, other):
        if not self._compatible(other):
            return NotImplemented
        if self.twopii_power != other.twopii_power and not (
            self.is_zero() or other.is_zero()
        ):
            raise PreconditionError(
                "cannot add forms carrying different powers of 2 pi i"
            )
        power = other.twopii_power if self.is_zero() else self.twopii_power
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            acc = out.get(k)
            s = c if acc is None else acc + c
            if s.is_zero():
                out.pop(k, None)
            else:
                out[k] = s
        return FourierPQForm(self.p, self.q, self.n, self.m, out, power)

    def __neg__(self):
        return self.scale(Fraction(-1))

    def __sub__(self, other):
        if not self._compatible(other):
            return NotImplemented
        return self + (-other)

    def scale(self, c):
        c = _coerce_coeff(c)
        if c.is_zero():
            return FourierPQForm(self.p, self.q, self.n, self.m, {}, self.twopii_power)
        out = {k: v * c for k, v in self.coeffs.items()}
        return FourierPQForm(self.p, self.q, self.n, self.m, out, self.twopii_power)

    def __eq__(self, other):
        if not isinstance(other, FourierPQForm):
            return NotImplemented
        if not self._compatible(other):
            return False
        if self.is_zero() and other.is_zero():
            return True
        if self.twopii_power != other.twopii_power:
            return False
        if set(self.coeffs) != set(other.coeffs):
            return False
        return all(self.coeffs[k] == other.coeffs[k] for k in self.coeffs)

    def __repr__(self):
        return (
            f"FourierPQForm(p={self.p}, q={self.q}, n={self.n}, m={self.m}, "
            f"terms={len(self.coeffs)}, twopii_power={self.twopii_power})"
        )

    # -- serialization -------------------------------------------------------

    def to_json_obj(self):
        terms = []
        for (idx, I, J), c in self.terms():
            terms.append(
                {
                    "pi": list(idx.pi),
                    "rho": list(idx.rho),
                    "sigma": list(idx.sigma),
                    "I": list(I),
                    "J": list(J),
                    "re": encode_scalar(c.re),
                    "im": encode_scalar(c.im),
                }
            )
        return {
            "p": self.p,
            "q": self.q,
            "n": self.n,
            "m": self.m,
            "twopii_power": self.twopii_power,
            "terms": terms,
        }

    @classmethod
    def from_json_obj(cls, obj, field=None):
        if not isinstance(obj, dict):
            raise SchemaError("form: expected an object")
        for key in ("p", "q", "n", "m"):
            if key not in obj:
                raise SchemaError(f"form: missing {key}")
        p = decode_int(obj["p"], "form.p")
        q = decode_int(obj["q"], "form.q")
        n = decode_int(obj["n"], "form.n")
        m = decode_int(obj["m"], "form.m")
        power = decode_int(obj.get("twopii_power", 0), "form.twopii_power")
        raw = obj.get("terms", [])
        if not isinstance(raw, list):
            raise SchemaError("form.terms: expected a list")
        coeffs = {}
        for i, t in enumerate(raw):
            where = f"form.terms[{i}]"
            if not isinstance(t, dict):
                raise SchemaError(f"{where}: expected an object")
            missing = {"pi", "rho", "sigma", "I", "J", "re", "im"} - set(t)
            if missing:
                raise SchemaError(f"{where}: missing {sorted(missing)}")
            idx = CharIndex(
                decode_int_vector(t["pi"], m, f"{where}.pi"),
                decode_int_vector(t["rho"], m, f"{where}.rho"),
                decode_int_vector(t["sigma"], n - m, f"{where}.sigma"),
            )
            I = decode_int_vector(t["I"], p, f"{where}.I")
            J = decode_int_vector(t["J"], q, f"{where}.J")
            c = ExactComplex(
                decode_scalar(t["re"], field, f"{where}.re"),
                decode_scalar(t["im"], field, f"{where}.im"),
            )
            key = (idx, I, J)
            if key in coeffs:
                raise SchemaError(f"{where}: duplicate term key")
            coeffs[key] = c
        try:
            return cls(p, q, n, m, coeffs, power)
        except ValueError as exc:
            raise SchemaError(f"form: {exc}") from None


def harmonic_part(f):
    """The zero-character slice of a form, with the same 2 pi i power."""
    kept = {k: c for k, c in f.coeffs.items() if k[0].is_zero()}
    return FourierPQForm(f.p, f.q, f.n, f.m, kept, f.twopii_power)


# ---------------------------------------------------------------------------
# dbar and the contraction homotopy
# ---------------------------------------------------------------------------


def _check_form_matches(P, f):
    if (f.n, f.m) != (P.n, P.m):
        raise ValueError(
            f"form dimensions (n={f.n}, m={f.m}) do not match the lattice "
            f"(n={P.n}, m={P.m})"
        )


def dbar(f, P):
    """dbar of a truncated form; degree (p, q) -> (p, q+1), power + 1.

    Acts per character as wedging with 2 pi i sum_j a_j dzbar_j.  Exact:
    dbar of a closed form is the empty form, not a small one.
    """
    if not isinstance(P, PeriodMatrix):
        raise ValueError("P must be a PeriodMatrix")
    _check_form_matches(P, f)
    if f.q > f.m:  # already past top degree; only the zero form lives here
        return FourierPQForm(f.p, f.q, f.n, f.m, {}, f.twopii_power + 1)
    ninv = _ninv(P)
    cache = {}
    out = {}
    for (idx, I, J), c in f.coeffs.items():
        avec = cache.get(idx)
        if avec is None:
            avec = _a_vector_given_ninv(P, idx, ninv)
            cache[idx] = avec
        for j in range(1, f.m + 1):
            if j in J:
                continue
            aj = avec.entries[j - 1]
            if aj.is_zero():
                continue
            before = sum(1 for x in J if x < j)
            term = c * aj
            if (f.p + before) % 2:
                term = -term
            newJ = tuple(sorted(J + (j,)))
            key = (idx, I, newJ)
            acc = out.get(key)
            s = term if acc is None else acc + term
            if s.is_zero():
                out.pop(key, None)
            else:
                out[key] = s
    return FourierPQForm(f.p, f.q + 1, f.n, f.m, out, f.twopii_power + 1)


def homotopy_eta(f, P, conjugate_lambda=True):
    """Solve dbar(eta) = f - harmonic_part(f) for a closed (p, q)-form.

    Contracts each nonzero character against lambda(dzbar_j) =
    conj(a_j) / ||a||^2, dropping the 2 pi i power by one.  Requires
    q >= 1 and exact closedness.  A vanishing a-vector on a nonzero
    character is refused with its integer witness: it certifies the
    lattice is not a Cousin group, and no primitive exists there.

    ``conjugate_lambda=False`` switches to the unconjugated functional.
    That variant is wrong whenever some a_j is not real; it is kept only
    so the failure can be demonstrated.
    """
    if not isinstance(P, PeriodMatrix):
        raise ValueError("P must be a PeriodMatrix")
    _check_form_matches(P, f)
    if f.q < 1:
        raise PreconditionError("homotopy needs q >= 1")
    if not dbar(f, P).is_zero():
        raise PreconditionError("form is not dbar-closed; no primitive exists")
    return _contract_lambda(f, P, conjugate_lambda)


def _contract_lambda(f, P, conjugate_lambda=True):
    """The raw lambda-contraction, no closedness gate.

    Composed with dbar in either order it sums to the identity on every
    nonzero character, closed input or not; homotopy_eta is this plus
    the preconditions.
    """
    ninv = _ninv(P)
    cache = {}
    out = {}
    for (idx, I, J), c in f.coeffs.items():
        if idx.is_zero():
            continue
        avec = cache.get(idx)
        if avec is None:
            avec = _a_vector_given_ninv(P, idx, ninv)
            cache[idx] = avec
        witness = avec.cousin_witness()
        if witness is not None:
            sigma, tau = witness
            raise PreconditionError(
                f"a-vector vanishes for character sigma={list(sigma)}: "
                f"t(sigma) R is integral, tau={list(tau)}; "
                "the lattice is not a Cousin group"
            )
        norm = ExactComplex.from_real(avec.norm_sq)
        for k_pos, j in enumerate(J):
            aj = avec.entries[j - 1]
            lam = aj.conj() if conjugate_lambda else aj
            if lam.is_zero():
                continue
            term = c * (lam / norm)
            if (f.p + k_pos) % 2:
                term = -term
            newJ = J[:k_pos] + J[k_pos + 1 :]
            key = (idx, I, newJ)
            acc = out.get(key)
            s = term if acc is None else acc + term
            if s.is_zero():
                out.pop(key, None)
            else:
                out[key] = s
    return FourierPQForm(f.p, f.q - 1, f.n, f.m, out, f.twopii_power - 1)


# ---------------------------------------------------------------------------
# cohomology dimensions over a truncation box
# ---------------------------------------------------------------------------


def _koszul_rank(P, avec, j, m):
    """Rank of wedging with the a-vector from j-fold to (j+1)-fold dzbar."""
    if j < 0 or j >= m:
        return 0
    cols = list(itertools.combinations(range(1, m + 1), j))
    rows = list(itertools.combinations(range(1, m + 1), j + 1))
    row_pos = {T: i for i, T in enumerate(rows)}
    zero = _cx_zero_like(P)
    A = [[zero] * len(cols) for _ in rows]
    for ci, S in enumerate(cols):
        for jj in range(1, m + 1):
            if jj in S:
                continue
            aj = avec.entries[jj - 1]
            if aj.is_zero():
                continue
            T = tuple(sorted(S + (jj,)))
            before = sum(1 for x in S if x < jj)
            A[row_pos[T]][ci] = -aj if before % 2 else aj
    return field_rank(A, is_zero=lambda z: z.is_zero())


def _box_characters(P, box):
    m, k = P.m, P.n - P.m
    rng = range(-box, box + 1)
    for pi in itertools.product(rng, repeat=m):
        for rho in itertools.product(rng, repeat=m):
            for sigma in itertools.product(rng, repeat=k):
                yield CharIndex(pi, rho, sigma)


def cohomology_dims(P, p, q, truncation_box):
    """Dimension of dbar cohomology in bidegree (p, q) over a character box.

    Builds, for every character with all of |pi|, |rho|, |sigma| at most
    ``truncation_box``, the three-term piece of its exterior complex and
    adds up kernel-mod-image dimensions, all ranks exact.  The zero
    character contributes C(n, p) C(m, q); on a Cousin lattice every
    other character contributes nothing, whatever the box.  The rank
    computation reconfirms that instead of assuming it.
    """
    if not isinstance(P, PeriodMatrix):
        raise ValueError("P must be a PeriodMatrix")
    if isinstance(truncation_box, bool) or not isinstance(truncation_box, int):
        raise ValueError("truncation_box must be an integer")
    if truncation_box < 0:
        raise ValueError("truncation_box must be nonnegative")
    cert = is_cousin(P)
    if not cert.is_cousin:
        raise PreconditionError(
            f"lattice is not a Cousin group: t(sigma) R is integral for "
            f"sigma={list(cert.sigma)}, tau={list(cert.tau)}"
        )
    n, m = P.n, P.m
    if p < 0 or p > n or q < 0 or q > m:
        return 0
    ninv = _ninv(P)
    cmq = math.comb(m, q)
    total = 0
    for idx in _box_characters(P, truncation_box):
        avec = _a_vector_given_ninv(P, idx, ninv)
        rank_q = _koszul_rank(P, avec, q, m)
        rank_qm1 = _koszul_rank(P, avec, q - 1, m)
        total += cmq - rank_q - rank_qm1
    return math.comb(n, p) * total


# ---------------------------------------------------------------------------
# norm floor constants and the box verifier
# ---------------------------------------------------------------------------


def _frobenius_sq(P, rows):
    acc = P._zero_scalar()
    for row in rows:
        for x in row:
            acc = acc + x * x
    return acc


def _nonneg_interval(P, x, bits=128):
    if isinstance(x, Fraction):
        iv = Interval.from_fraction(x, bits)
    else:
        iv = P.entry_interval(x, bits)
    lo = max(iv.lo_fraction(), Fraction(0))
    return Interval.from_endpoints(lo, iv.hi_fraction(), bits)


def _sqrt_hi(P, x, bits=128):
    return _nonneg_interval(P, x, bits).sqrt().hi_fraction()


def _sqrt_lo(P, x, bits=128):
    return _nonneg_interval(P, x, bits).sqrt().lo_fraction()


def _scalar_float(P, x):
    if isinstance(x, Fraction):
        return float(x)
    return float(P.entry_interval(x, 64))


class BoundConstants:
    """Certified norm floor data for the a-vectors of one lattice.

    k1 bounds the Frobenius norm of M N^{-1} from above, k2 bounds
    1/Frobenius(N) from below, k = k2/(1 + k1 + k2), and for each decay
    base a the floor C1(a) = k C(a) / 2 satisfies

        ||a_idx|| >= C1(a) a^{|sigma|_1}

    for every nonzero character, provided C(a) really is a dispersion
    constant of the lattice at base a.  kappa0 is an unconditional
    positive floor for the sigma = 0 characters alone.  verify_box
    sweeps a whole truncation box against the inequality.
    """

    __slots__ = ("k1", "k2", "k", "kappa0", "C1_of_a", "details", "_P")

    def __init__(self, k1, k2, k, kappa0, C1_of_a, details, P):
        self.k1 = k1
        self.k2 = k2
        self.k = k
        self.kappa0 = kappa0
        self.C1_of_a = dict(C1_of_a)
        self.details = details
        self._P = P

    def to_dict(self):
        return {
            "k1": encode_scalar(self.k1),
            "k2": encode_scalar(self.k2),
            "k": encode_scalar(self.k),
            "kappa0": encode_scalar(self.kappa0),
            "C1_of_a": {
                encode_scalar(a): encode_scalar(c1)
                for a, c1 in sorted(self.C1_of_a.items())
            },
            "details": self.details,
        }

    def __repr__(self):
        return (
            f"BoundConstants(k1={self.k1}, k2={self.k2}, k={self.k}, "
            f"kappa0={self.kappa0}, bases={sorted(self.C1_of_a)})"
        )

    # -- the box sweep -------------------------------------------------------

    def verify_box(self, box, screen_slack=1e-6):
        """Check ||a_idx|| >= C1(a) a^{|sigma|} over all nonzero idx in the box.

        Floats do the bulk comparison, vectorized over the (pi, rho)
        plane for each sigma.  Any row within ``screen_slack`` of the
        boundary is recomputed exactly, as is the global minimum row, so
        the screen tolerance never decides an outcome; float noise is
        orders of magnitude below the slack for any feasible box.
        Returns a report dict; ``ok`` is False only on an exactly
        confirmed violation, which would mean the supplied C(a) was not
        a dispersion constant after all.
        """
        P = self._P
        if isinstance(box, bool) or not isinstance(box, int) or box < 0:
            raise ValueError("box must be a nonnegative integer")
        m, k_real = P.m, P.n - P.m
        ninv = _ninv(P)

        def fmat(rows, width):
            arr = np.array(
                [[_scalar_float(P, x) for x in row] for row in rows], dtype=float
            )
            return arr.reshape((len(rows), width))

        R1f = fmat(P.R1, m)
        R2f = fmat(P.R2, m)
        Mf = fmat(P.M, m)
        Ninvf = fmat(ninv, m)
        R1Mf = R1f @ Mf

        rng = np.arange(-box, box + 1)
        pi_grid = np.array(list(itertools.product(rng, repeat=m)), dtype=float)
        rho_grid = pi_grid.copy()
        piM = pi_grid @ Mf
        pi_is_zero = np.all(pi_grid == 0, axis=1)
        rho_is_zero = np.all(rho_grid == 0, axis=1)
        zero_pair = np.outer(pi_is_zero, rho_is_zero)
        pairs_per_sigma = pi_grid.shape[0] * rho_grid.shape[0]

        checked = 0
        escalated = 0
        violations = []
        worst = None  # (ratio_sq, pi, rho, sigma, rhs)

        per_a = {a: None for a in self.C1_of_a}
        for sigma in itertools.product(range(-box, box + 1), repeat=k_real):
            sig = np.array(sigma, dtype=float)
            l1 = int(sum(abs(s) for s in sigma))
            sigma_zero = l1 == 0
            X = pi_grid - (sig @ R1f)
            Ypre = rho_grid[None, :, :] - piM[:, None, :] + (sig @ (R1Mf - R2f))
            Y = Ypre @ Ninvf
            norm2 = ((X * X).sum(axis=1)[:, None] + (Y * Y).sum(axis=2)) / 4.0

            for a, c1 in self.C1_of_a.items():
                rhs = c1 * c1 * a ** (2 * l1)
                ratio = norm2 / float(rhs)
                if sigma_zero:
                    ratio[zero_pair] = np.inf
                    checked += pairs_per_sigma - 1
                else:
                    checked += pairs_per_sigma
                flat = int(np.argmin(ratio))
                ip, ir = np.unravel_index(flat, ratio.shape)
                mmin = float(ratio[ip, ir])
                if per_a[a] is None or mmin < per_a[a]:
                    per_a[a] = mmin
                if worst is None or mmin < worst[0]:
                    worst = (
                        mmin,
                        tuple(int(v) for v in pi_grid[ip]),
                        tuple(int(v) for v in rho_grid[ir]),
                        sigma,
                        rhs,
                    )
                for ip, ir in np.argwhere(ratio < 1.0 + screen_slack):
                    pi = tuple(int(v) for v in pi_grid[ip])
                    rho = tuple(int(v) for v in rho_grid[ir])
                    escalated += 1
                    idx = CharIndex(pi, rho, sigma)
                    avec = _a_vector_given_ninv(P, idx, ninv)
                    if _scalar_sign(P, avec.norm_sq - rhs) < 0:
                        violations.append(
                            {
                                "pi": list(pi),
                                "rho": list(rho),
                                "sigma": list(sigma),
                                "a": str(a),
                            }
                        )

        min_row_certified = False
        if worst is not None and math.isfinite(worst[0]):
            _, pi, rho, sigma, rhs = worst
            idx = CharIndex(pi, rho, sigma)
            avec = _a_vector_given_ninv(P, idx, ninv)
            min_row_certified = _scalar_sign(P, avec.norm_sq - rhs) >= 0

        return {
            "ok": not violations,
            "box": box,
            "checked": checked,
            "escalated": escalated,
            "violations": violations,
            "min_ratio": math.sqrt(worst[0]) if worst is not None else None,
            "min_row": None
            if worst is None
            else {
                "pi": list(worst[1]),
                "rho": list(worst[2]),
                "sigma": list(worst[3]),
            },
            "min_row_certified": min_row_certified,
            "per_a": {
                str(a): {"min_ratio": math.sqrt(v)} if v is not None else None
                for a, v in sorted(per_a.items())
            },
        }


def bound_constants(P, a, C_of_a):
    """Frobenius-certified constants k1, k2, k and the floors C1(a).

    ``a`` is one rational base in (0, 1) or a sequence of them;
    ``C_of_a`` the matching dispersion constant(s), for instance from a
    Liouville-type certificate evaluated at the same base.  All outputs
    are exact Fractions, rounded only in the safe direction.

    kappa0 is the sigma = 0 floor: whenever pi is nonzero the real part
    alone gives ||a_idx|| >= 1/2, and with pi = 0, rho nonzero the
    imaginary part gives k2 ||rho|| / 2 >= k2 / 2.  The report also
    folds in a certified scan of the small box |pi|, |rho| <= 2; the
    scan can only lower the reported floor, never raise it above the
    proven one.
    """
    if not isinstance(P, PeriodMatrix):
        raise ValueError("P must be a PeriodMatrix")
    if isinstance(a, (list, tuple)):
        a_values = [Fraction(x) for x in a]
        if isinstance(C_of_a, dict):
            C_values = [Fraction(C_of_a[x]) for x in a]
        else:
            C_values = [Fraction(c) for c in C_of_a]
        if len(C_values) != len(a_values):
            raise ValueError("need one constant per base")
    else:
        a_values = [Fraction(a)]
        C_values = [Fraction(C_of_a)]
    if len(set(a_values)) != len(a_values):
        raise ValueError("decay bases must be distinct")
    for av in a_values:
        if not 0 < av < 1:
            raise PreconditionError("decay bases must lie strictly inside (0, 1)")
    for cv in C_values:
        if cv <= 0:
            raise PreconditionError("dispersion constants must be positive")

    ninv = _ninv(P)
    fro2_mn = _frobenius_sq(P, _mat_mul_exact(P.M, ninv))
    k1 = Fraction(0) if _scalar_is_zero(fro2_mn) else _sqrt_hi(P, fro2_mn)
    fro2_n = _frobenius_sq(P, P.N)
    if _scalar_is_zero(fro2_n - P._one_scalar()):
        k2 = Fraction(1)
    else:
        k2 = Fraction(1) / _sqrt_hi(P, fro2_n)
    k = k2 / (1 + k1 + k2)

    C1 = {av: cv * k / 2 for av, cv in zip(a_values, C_values)}

    growth = min(_HALF, k2 / 2)
    box_min = None
    for pi in itertools.product(range(-2, 3), repeat=P.m):
        for rho in itertools.product(range(-2, 3), repeat=P.m):
            if not any(pi) and not any(rho):
                continue
            idx = CharIndex(pi, rho, (0,) * (P.n - P.m))
            avec = _a_vector_given_ninv(P, idx, ninv)
            lo = _sqrt_lo(P, avec.norm_sq)
            if box_min is None or lo < box_min:
                box_min = lo
    kappa0 = growth if box_min is None else min(growth, box_min)

    details = {
        "kappa0_growth_floor": str(growth),
        "kappa0_small_box_min": str(box_min) if box_min is not None else None,
    }
    return BoundConstants(k1, k2, k, kappa0, C1, details, P)
