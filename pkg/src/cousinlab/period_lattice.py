"""Period matrices in normal form and the exact toroidal-quotient criterion.

A discrete rank n+m subgroup of C^n (1 <= m <= n, full complex span) can be
carried by a complex-linear coordinate change A and a unimodular change of
generators U into the shape

        [ 0      I_m    M + iN ]      first m rows, complex
        [ I_n-m  R1     R2     ]      last n-m rows, real

with N invertible.  ``normalize`` finds such a presentation exactly, records
(A, U), and canonicalizes the remaining freedom: inputs already in this shape
pass through verbatim (so normalize is idempotent by construction), all other
inputs go through a deterministic minimum-key search over the finitely many
ways to pick the real block and the torus basis from the supplied columns.

``is_cousin`` then decides whether the quotient has only constant holomorphic
functions: with R = [R1 | R2], the group is toroidal exactly when no nonzero
integer row vector sigma makes t(sigma) R integral.  Over exact entries this
is a pure integer-kernel computation, never a search.

Scalars are Fractions throughout, or elements of one shared number field
together with the index of the real embedding that realizes them as real
numbers.  Mixing incommensurable entry kinds is an input error.
"""

import itertools
from fractions import Fraction

from .errors import PreconditionError, ResourceLimit
from ._linalg import (
    field_det,
    field_inv,
    field_kernel,
    field_rank,
    field_solve,
    integer_kernel_of_rational,
)
from .exact_numerics import DEFAULT_PRECISION, Interval
from .number_field import FieldElement, NumberField

# ---------------------------------------------------------------------------
# scalar helpers: Fraction | FieldElement, uniformly
# ---------------------------------------------------------------------------


def _is_field_elt(x):
    return isinstance(x, FieldElement)


def _scalar_is_zero(x):
    if _is_field_elt(x):
        return x.is_zero()
    return x == 0


def _scalar_key(x):
    """Deterministic serialization key; only compared within one domain."""
    if _is_field_elt(x):
        return tuple((c.numerator, c.denominator) for c in x.coords)
    q = Fraction(x)
    return ((q.numerator, q.denominator),)


def _scalar_pref_key(x):
    """Key for choosing among equivalent normal forms.

    Orders by a magnitude-ish measure with positive preferred over negative
    at equal measure, so that e.g. N = [1] beats N = [-1] and both beat
    N = [2].  Field elements compare from the highest power-basis
    coordinate down, which makes rational values beat irrational ones of
    comparable size.  Purely a deterministic tie-break, not a numeric
    order.
    """

    def frac_key(q):
        return (abs(q.numerator), q.denominator, 0 if q >= 0 else 1)

    if _is_field_elt(x):
        return tuple(frac_key(c) for c in reversed(x.coords))
    return (frac_key(Fraction(x)),)


def _scalar_first_sign(x):
    """Sign of the first nonzero rational coordinate (0 for zero)."""
    coords = x.coords if _is_field_elt(x) else (Fraction(x),)
    for c in coords:
        if c != 0:
            return 1 if c > 0 else -1
    return 0


def _scalar_floor(x, embedding_index):
    """Exact floor of the real number the scalar denotes."""
    if not _is_field_elt(x):
        q = Fraction(x)
        return q.numerator // q.denominator
    if x.is_rational():
        q = x.coords[0]
        return q.numerator // q.denominator
    bits = 64
    while True:
        iv = x.embed(embedding_index, bits).re
        lo = iv.lo_fraction()
        hi = iv.hi_fraction()
        flo = lo.numerator // lo.denominator
        fhi = hi.numerator // hi.denominator
        if flo == fhi:
            # both endpoints in [flo, flo+1), so the value is too
            return flo
        bits *= 2  # irrational values separate from integers eventually


class ExactComplex:
    """A complex number with exact real and imaginary parts.

    Parts are Fractions or FieldElements of one shared field; arithmetic
    never rounds.  This is the scalar the normalization linear algebra
    runs on.
    """

    __slots__ = ("re", "im")

    def __init__(self, re, im):
        self.re = re
        self.im = im

    @classmethod
    def from_real(cls, x):
        if _is_field_elt(x):
            return cls(x, x.field.zero())
        return cls(Fraction(x), Fraction(0))

    def is_zero(self):
        return _scalar_is_zero(self.re) and _scalar_is_zero(self.im)

    def is_real(self):
        return _scalar_is_zero(self.im)

    def conj(self):
        return ExactComplex(self.re, -self.im)

    def __add__(self, other):
        return ExactComplex(self.re + other.re, self.im + other.im)

    def __sub__(self, other):
        return ExactComplex(self.re - other.re, self.im - other.im)

    def __neg__(self):
        return ExactComplex(-self.re, -self.im)

    def __mul__(self, other):
        return ExactComplex(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    def __truediv__(self, other):
        d = other.re * other.re + other.im * other.im
        if _scalar_is_zero(d):
            raise ZeroDivisionError("division by zero ExactComplex")
        if _is_field_elt(d):
            inv = d.inverse()
            num = self * other.conj()
            return ExactComplex(num.re * inv, num.im * inv)
        num = self * other.conj()
        return ExactComplex(num.re / d, num.im / d)

    def __eq__(self, other):
        if not isinstance(other, ExactComplex):
            return NotImplemented
        return _scalar_is_zero(self.re - other.re) and _scalar_is_zero(
            self.im - other.im
        )

    def __hash__(self):
        return hash((_scalar_key(self.re), _scalar_key(self.im)))

    def __repr__(self):
        return f"ExactComplex({self.re!r}, {self.im!r})"

    def key(self):
        return _scalar_key(self.re) + _scalar_key(self.im)


def _cx_is_zero(z):
    return z.is_zero()


# ---------------------------------------------------------------------------
# PeriodMatrix
# ---------------------------------------------------------------------------


class PeriodMatrix:
    """Normal-form lattice data: blocks M, N (m x m) and R1, R2 ((n-m) x m).

    Entries are Fractions, or FieldElements of ``field`` realized as reals
    through the real embedding ``embedding_index`` (1-based).  N's
    invertibility is certified at construction by an exact determinant in
    the scalar field, which is equivalent to invertibility over R because
    field elements embed injectively.
    """

    def __init__(self, M, N, R1, R2, field=None, embedding_index=None):
        self.field = field
        self.embedding_index = embedding_index
        M = [list(row) for row in M]
        N = [list(row) for row in N]
        R1 = [list(row) for row in R1]
        R2 = [list(row) for row in R2]
        m = len(N)
        if m < 1 or any(len(row) != m for row in N) or len(M) != m:
            raise PreconditionError("N and M must be square of size m >= 1")
        if any(len(row) != m for row in M):
            raise PreconditionError("M must be m x m")
        k = len(R1)
        if len(R2) != k:
            raise PreconditionError("R1 and R2 need the same number of rows")
        if any(len(row) != m for row in R1) or any(len(row) != m for row in R2):
            raise PreconditionError("R1 and R2 must have m columns")
        self.m = m
        self.n = m + k
        coerce = self._make_coercer()
        self.M = tuple(tuple(coerce(x) for x in row) for row in M)
        self.N = tuple(tuple(coerce(x) for x in row) for row in N)
        self.R1 = tuple(tuple(coerce(x) for x in row) for row in R1)
        self.R2 = tuple(tuple(coerce(x) for x in row) for row in R2)
        det = _exact_det([[x for x in row] for row in self.N])
        if _scalar_is_zero(det):
            raise PreconditionError("N block is singular")

    def _make_coercer(self):
        field = self.field
        if field is None:

            def coerce(x):
                if _is_field_elt(x):
                    raise PreconditionError(
                        "field elements supplied without a field declaration"
                    )
                return Fraction(x)

            return coerce
        if not isinstance(field, NumberField):
            raise PreconditionError("field must be a NumberField")
        idx = self.embedding_index
        if not isinstance(idx, int) or not 1 <= idx <= field.s:
            raise PreconditionError(
                "embedding_index must name a real embedding of the field"
            )

        def coerce(x):
            if _is_field_elt(x):
                if x.field.minpoly != field.minpoly:
                    raise PreconditionError("entries from a different field")
                return x
            return field.from_rational(Fraction(x))

        return coerce

    # -- views ---------------------------------------------------------------

    def R_rows(self):
        """R = [R1 | R2] as a list of n-m rows of length 2m."""
        return [list(r1) + list(r2) for r1, r2 in zip(self.R1, self.R2)]

    def entry_interval(self, x, bits=DEFAULT_PRECISION):
        """Certified Interval for a stored scalar."""
        if _is_field_elt(x):
            return x.embed(self.embedding_index, bits).re
        return Interval.from_fraction(Fraction(x), bits)

    def matrix_rows(self):
        """The n x (n+m) generating matrix, as rows of ExactComplex."""
        m, n = self.m, self.n
        zero = self._zero_scalar()
        one = self._one_scalar()

        def ec(re, im=None):
            return ExactComplex(re, im if im is not None else zero)

        rows = []
        for i in range(m):  # torus rows
            row = []
            for j in range(n - m):
                row.append(ec(zero))
            for k in range(m):
                row.append(ec(one if k == i else zero))
            for k in range(m):
                row.append(ec(self.M[i][k], self.N[i][k]))
            rows.append(row)
        for i in range(n - m):  # real rows
            row = []
            for j in range(n - m):
                row.append(ec(one if j == i else zero))
            for k in range(m):
                row.append(ec(self.R1[i][k]))
            for k in range(m):
                row.append(ec(self.R2[i][k]))
            rows.append(row)
        return rows

    def _zero_scalar(self):
        return self.field.zero() if self.field else Fraction(0)

    def _one_scalar(self):
        return self.field.one() if self.field else Fraction(1)

    def __eq__(self, other):
        if not isinstance(other, PeriodMatrix):
            return NotImplemented
        if (self.n, self.m) != (other.n, other.m):
            return False
        for A, B in ((self.M, other.M), (self.N, other.N), (self.R1, other.R1), (self.R2, other.R2)):
            for ra, rb in zip(A, B):
                for a, b in zip(ra, rb):
                    if not _scalar_is_zero(a - b):
                        return False
        return True

    def __repr__(self):
        return f"PeriodMatrix(n={self.n}, m={self.m})"

    def block_summary(self):
        def fmt(block):
            return [[str(x) for x in row] for row in block]

        return {
            "M": fmt(self.M),
            "N": fmt(self.N),
            "R1": fmt(self.R1),
            "R2": fmt(self.R2),
        }


def _exact_det(rows):
    if len(rows) == 1:
        return rows[0][0]
    return field_det(rows, is_zero=_scalar_is_zero)


# ---------------------------------------------------------------------------
# the Cousin criterion
# ---------------------------------------------------------------------------


class CousinCertificate:
    """Decision record: either "cousin", or a violating pair (sigma, tau).

    The witness satisfies t(sigma) R + t(tau) = 0 exactly, with sigma a
    nonzero integer vector of length n-m and tau of length 2m.
    """

    __slots__ = ("verdict", "sigma", "tau")

    def __init__(self, verdict, sigma=None, tau=None):
        if verdict not in ("cousin", "not_cousin"):
            raise ValueError(verdict)
        if (verdict == "not_cousin") != (sigma is not None):
            raise ValueError("witness present iff verdict is not_cousin")
        self.verdict = verdict
        self.sigma = tuple(sigma) if sigma is not None else None
        self.tau = tuple(tau) if tau is not None else None

    @property
    def is_cousin(self):
        return self.verdict == "cousin"

    def __repr__(self):
        if self.is_cousin:
            return "CousinCertificate(cousin)"
        return f"CousinCertificate(not_cousin, sigma={self.sigma}, tau={self.tau})"

    def to_dict(self):
        out = {"verdict": self.verdict}
        if self.sigma is not None:
            out["sigma"] = list(self.sigma)
            out["tau"] = list(self.tau)
        return out


def is_cousin(P):
    """Exact decision of the toroidal criterion for a PeriodMatrix.

    The violating sigma form the integer kernel of a rational linear
    system: rational entries contribute one congruence row per R column,
    field entries contribute one row per power-basis coordinate (an
    integer combination of irrational basis coordinates vanishes only if
    each coordinate part vanishes).  No enumeration, no tolerance.
    """
    k = P.n - P.m
    if k == 0:
        return CousinCertificate("cousin")
    R = P.R_rows()
    rows = []
    two_m = 2 * P.m
    if P.field is None:
        for c in range(two_m):
            row = [Fraction(R[i][c]) for i in range(k)]
            row += [Fraction(1) if j == c else Fraction(0) for j in range(two_m)]
            rows.append(row)
    else:
        d = P.field.degree
        for c in range(two_m):
            for coord in range(d):
                row = [R[i][c].coords[coord] for i in range(k)]
                if coord == 0:
                    row += [
                        Fraction(1) if j == c else Fraction(0) for j in range(two_m)
                    ]
                else:
                    row += [Fraction(0)] * two_m
                rows.append(row)
    kernel = integer_kernel_of_rational(rows)
    if not kernel:
        return CousinCertificate("cousin")
    best = None
    for v in kernel:
        sigma, tau = v[:k], v[k:]
        if all(x == 0 for x in sigma):
            continue  # impossible by construction, kept as a guard
        first = next(x for x in sigma if x != 0)
        if first < 0:
            sigma = [-x for x in sigma]
            tau = [-x for x in tau]
        key = (sum(abs(x) for x in sigma), tuple(sigma), tuple(tau))
        if best is None or key < best[0]:
            best = (key, sigma, tau)
    if best is None:
        return CousinCertificate("cousin")
    return CousinCertificate("not_cousin", best[1], best[2])


# ---------------------------------------------------------------------------
# normalize
# ---------------------------------------------------------------------------

_CANDIDATE_CAP = 20000


def _column_flat_key(col):
    out = ()
    for z in col:
        out += z.key()
    return out


def _column_pref_key(col):
    out = ()
    for z in col:
        out += _scalar_pref_key(z.re) + _scalar_pref_key(z.im)
    return out


def _column_sign(col):
    for z in col:
        s = _scalar_first_sign(z.re)
        if s:
            return s
        s = _scalar_first_sign(z.im)
        if s:
            return s
    return 0


def _real_stack(cols, n=None):
    """2n x k matrix over the base scalars: re rows then im rows."""
    if not cols:
        return [[] for _ in range(2 * n)] if n is not None else []
    n = len(cols[0])
    rows = []
    for i in range(n):
        rows.append([c[i].re for c in cols])
    for i in range(n):
        rows.append([c[i].im for c in cols])
    return rows


def _coerce_columns(rows, field):
    """Input rows of mixed scalars -> list of ExactComplex column tuples."""

    def to_scalar(x):
        if _is_field_elt(x):
            if field is None or x.field.minpoly != field.minpoly:
                raise PreconditionError(
                    "field elements require a matching field declaration"
                )
            return x
        q = Fraction(x)
        return field.from_rational(q) if field is not None else q

    def to_complex(x):
        if isinstance(x, ExactComplex):
            return ExactComplex(to_scalar(x.re), to_scalar(x.im))
        if isinstance(x, tuple) and len(x) == 2:
            return ExactComplex(to_scalar(x[0]), to_scalar(x[1]))
        return ExactComplex.from_real(to_scalar(x))

    mat = [[to_complex(x) for x in row] for row in rows]
    n = len(mat)
    if n == 0 or any(len(row) != len(mat[0]) for row in mat):
        raise PreconditionError("ragged or empty period matrix input")
    cols = [tuple(mat[i][j] for i in range(n)) for j in range(len(mat[0]))]
    return n, cols


def _try_verbatim(n, m, cols, field, embedding_index):
    """Recognize a column set already in normal form; None if not."""
    type1, type2, type3 = {}, {}, []
    for col in cols:
        head = col[:m]
        tail = col[m:]
        if any(not z.is_real() for z in tail):
            return None
        if all(z.is_zero() for z in head):
            # must be a real unit vector in the tail
            ones = [j for j, z in enumerate(tail) if not z.is_zero()]
            if len(ones) != 1 or not _scalar_is_zero(tail[ones[0]].re - _one_like(tail[ones[0]].re)):
                return None
            if ones[0] in type1:
                return None
            type1[ones[0]] = col
        elif all(z.is_real() for z in head):
            ones = [j for j, z in enumerate(head) if not z.is_zero()]
            if len(ones) != 1 or not _scalar_is_zero(head[ones[0]].re - _one_like(head[ones[0]].re)):
                return None
            if ones[0] in type2:
                return None
            type2[ones[0]] = col
        else:
            type3.append(col)
    if len(type1) != n - m or set(type1) != set(range(n - m)):
        return None
    if len(type2) != m or set(type2) != set(range(m)):
        return None
    if len(type3) != m:
        return None
    type3.sort(key=_column_flat_key)
    M = [[type3[k][i].re for k in range(m)] for i in range(m)]
    N = [[type3[k][i].im for k in range(m)] for i in range(m)]
    if _scalar_is_zero(_exact_det([row[:] for row in N])):
        return None
    R1 = [[type2[k][m + i].re for k in range(m)] for i in range(n - m)]
    R2 = [[type3[k][m + i].re for k in range(m)] for i in range(n - m)]
    for block in (R1, R2):
        for row in block:
            for x in row:
                f = _scalar_floor(x, embedding_index) if _is_field_elt(x) else Fraction(x).numerator // Fraction(x).denominator
                if f != 0:
                    return None  # entries must already be reduced to [0,1)
    return PeriodMatrix(M, N, R1, R2, field=field, embedding_index=embedding_index)


def _one_like(scalar):
    if _is_field_elt(scalar):
        return scalar.field.one()
    return Fraction(1)


def normalize(rows, field=None, embedding_index=None):
    """Bring a generating matrix into the normal form, exactly.

    ``rows`` is the n x (n+m) complex matrix whose columns generate the
    subgroup; entries may be Fractions, (re, im) pairs, ExactComplex, or
    FieldElements of ``field`` (then ``embedding_index`` names the real
    embedding that reads them as real numbers).

    The result records the coordinate change and the unimodular column
    transform on attributes ``transform_A`` (n x n ExactComplex rows) and
    ``transform_U`` (integer matrix), satisfying A * input * U = output
    columns entry for entry.  Inputs already in normal shape with R
    entries in [0,1) are returned verbatim apart from a canonical sort of
    the torus columns.
    """
    if field is not None and not (
        isinstance(embedding_index, int) and 1 <= embedding_index <= field.s
    ):
        raise PreconditionError("embedding_index must pick a real embedding")
    n, cols = _coerce_columns(rows, field)
    total = len(cols)
    m = total - n
    if m < 1:
        raise PreconditionError(
            f"{total} generators in C^{n}: no compact complex directions (m < 1)"
        )
    if m > n:
        raise PreconditionError(f"rank {total} exceeds 2n = {2*n}: not discrete")
    stack = _real_stack(cols)
    if field_rank(stack, is_zero=_scalar_is_zero) != total:
        raise PreconditionError(
            "columns are linearly dependent over R: not a rank n+m subgroup"
        )
    cmat = [[cols[j][i] for j in range(total)] for i in range(n)]
    if field_rank(cmat, is_zero=_cx_is_zero) != n:
        raise PreconditionError(
            "columns span a proper complex subspace: split off the C factor first"
        )

    verbatim = _try_verbatim(n, m, cols, field, embedding_index)
    if verbatim is not None:
        verbatim.transform_A = _identity_complex(n, cols)
        verbatim.transform_U = _verbatim_permutation(n, m, cols, verbatim)
        return verbatim

    # V = W meet iW, described by the x-coefficients with C x in V
    icols = [tuple(ExactComplex(-z.im, z.re) for z in col) for col in cols]
    big_rows = [a + [-b for b in c] for a, c in zip(stack, _real_stack(icols))]
    pairs = field_kernel(big_rows, is_zero=_scalar_is_zero)
    v_coeff_basis = [p[:total] for p in pairs]
    if len(v_coeff_basis) != 2 * m:
        raise AssertionError("complex-direction count disagrees with m")
    v_vectors = []
    for coeffs in v_coeff_basis:
        vec = []
        for i in range(n):
            acc = None
            for j in range(total):
                term = _cx_scale(cols[j][i], coeffs[j])
                acc = term if acc is None else acc + term
            vec.append(acc)
        v_vectors.append(tuple(vec))

    candidates = 0
    best = None
    v_stack = _real_stack(v_vectors)
    for s_idx in itertools.combinations(range(total), n - m):
        lam_cols_raw = [cols[j] for j in s_idx]
        test = [row[:] for row in v_stack]
        lam_stack = _real_stack(lam_cols_raw, n)
        for r, row in enumerate(test):
            row.extend(lam_stack[r])
        if field_rank(test, is_zero=_scalar_is_zero) != n + m:
            continue
        order = sorted(range(len(s_idx)), key=lambda t: _column_flat_key(lam_cols_raw[t]))
        lam_cols = []
        lam_signs = []
        lam_src = []
        for t in order:
            col = lam_cols_raw[t]
            sgn = _column_sign(col)
            if sgn < 0:
                col = tuple(-z for z in col)
            lam_signs.append(-1 if sgn < 0 else 1)
            lam_cols.append(col)
            lam_src.append(s_idx[t])
        mu_idx = [j for j in range(total) if j not in s_idx]
        # split each mu into a V part and real lambda coordinates
        mu_data = []
        lam_stack_n = _real_stack(lam_cols, n)
        solve_mat = [row[:] for row in v_stack]
        for r, row in enumerate(solve_mat):
            row.extend(lam_stack_n[r])
        ok = True
        for j in mu_idx:
            rhs = []
            for i in range(n):
                rhs.append(cols[j][i].re)
            for i in range(n):
                rhs.append(cols[j][i].im)
            sol = field_solve(solve_mat, rhs, is_zero=_scalar_is_zero)
            if sol is None:
                ok = False
                break
            x_coords = sol[2 * m :]
            if n == m:
                v_part = cols[j]
            else:
                v_part = tuple(
                    cols[j][i]
                    - _sum_cx(
                        _cx_scale(lam_cols[t][i], x_coords[t])
                        for t in range(n - m)
                    )
                    for i in range(n)
                )
            mu_data.append((j, v_part, x_coords))
        if not ok:
            continue
        for t_pick in itertools.combinations(range(len(mu_data)), m):
            t_cols = [mu_data[t][1] for t in t_pick]
            t_cmat = [[t_cols[k][i] for k in range(m)] for i in range(n)]
            if field_rank(t_cmat, is_zero=_cx_is_zero) != m:
                continue
            rest = [t for t in range(len(mu_data)) if t not in t_pick]
            for t_perm in itertools.permutations(t_pick):
                candidates += 1
                if candidates > _CANDIDATE_CAP:
                    raise ResourceLimit(
                        "normal-form search exceeded the candidate budget"
                    )
                cand = _build_candidate(
                    n, m, mu_data, t_perm, rest, lam_cols, field, embedding_index
                )
                if cand is None:
                    continue
                key, payload = cand
                if best is None or key < best[0]:
                    best = (key, payload, lam_cols, lam_signs, lam_src, s_idx)
    if best is None:
        raise PreconditionError("no valid normal-form decomposition found")
    _, payload, lam_cols, lam_signs, lam_src, s_idx = best
    P = PeriodMatrix(
        payload["M"], payload["N"], payload["R1"], payload["R2"],
        field=field, embedding_index=embedding_index,
    )
    A, U = _assemble_transform(
        n, m, cols, P, lam_cols, lam_signs, lam_src, payload
    )
    P.transform_A = A
    P.transform_U = U
    return P


def _cx_scale(z, scalar):
    return ExactComplex(z.re * scalar, z.im * scalar)


def _sum_cx(items):
    acc = None
    for x in items:
        acc = x if acc is None else acc + x
    return acc


def _build_candidate(n, m, mu_data, t_perm, rest, lam_cols, field, embedding_index):
    t_vparts = [mu_data[t][1] for t in t_perm]
    # torus coordinates of the non-basis columns in the chosen torus basis
    mn_cols = []
    sys_rows = [[t_vparts[k][i] for k in range(m)] for i in range(n)]
    for t in rest:
        rhs = [mu_data[t][1][i] for i in range(n)]
        sol = field_solve(sys_rows, rhs, is_zero=_cx_is_zero)
        if sol is None:
            return None
        mn_cols.append(sol)
    Mb = [[mn_cols[k][i].re for k in range(m)] for i in range(m)]
    Nb = [[mn_cols[k][i].im for k in range(m)] for i in range(m)]
    if _scalar_is_zero(_exact_det([row[:] for row in Nb])):
        return None
    idx = embedding_index
    r1_cols, r1_floors = [], []
    for k in t_perm:
        xs = mu_data[k][2]
        floors = [_scalar_floor(x, idx) for x in xs]
        r1_cols.append([x - f for x, f in zip(xs, floors)])
        r1_floors.append(floors)
    r2_cols, r2_floors = [], []
    for k in rest:
        xs = mu_data[k][2]
        floors = [_scalar_floor(x, idx) for x in xs]
        r2_cols.append([x - f for x, f in zip(xs, floors)])
        r2_floors.append(floors)
    # canonical order of the torus-offset columns by their final content
    order = sorted(
        range(len(rest)),
        key=lambda k: tuple(
            _scalar_key(mn_cols[k][i].re) + _scalar_key(mn_cols[k][i].im)
            for i in range(m)
        )
        + tuple(_scalar_key(x) for x in r2_cols[k]),
    )
    mn_cols = [mn_cols[k] for k in order]
    r2_cols = [r2_cols[k] for k in order]
    r2_floors = [r2_floors[k] for k in order]
    rest_ordered = [rest[k] for k in order]
    Mb = [[mn_cols[k][i].re for k in range(m)] for i in range(m)]
    Nb = [[mn_cols[k][i].im for k in range(m)] for i in range(m)]
    R1 = [[r1_cols[k][i] for k in range(m)] for i in range(n - m)]
    R2 = [[r2_cols[k][i] for k in range(m)] for i in range(n - m)]
    key = ()
    for block in (Mb, Nb, R1, R2):
        for row in block:
            for x in row:
                key += _scalar_pref_key(x)
    payload = {
        "M": Mb,
        "N": Nb,
        "R1": R1,
        "R2": R2,
        "t_perm": t_perm,
        "rest": rest_ordered,
        "r1_floors": r1_floors,
        "r2_floors": r2_floors,
        "mu_src": [mu_data[t][0] for t in t_perm] + [mu_data[t][0] for t in rest_ordered],
        "mu_vparts": [mu_data[t][1] for t in t_perm],
    }
    return key, payload


def _identity_complex(n, cols):
    zero = cols[0][0] - cols[0][0]
    one_re = _one_like(zero.re)
    rows = []
    for i in range(n):
        rows.append(
            [
                ExactComplex(one_re if j == i else zero.re - zero.re, zero.im - zero.im)
                for j in range(n)
            ]
        )
    return rows


def _verbatim_permutation(n, m, cols, P):
    out_cols_mat = P.matrix_rows()
    out_cols = [
        tuple(out_cols_mat[i][j] for i in range(n)) for j in range(len(cols))
    ]
    U = []
    for j, target in enumerate(out_cols):
        col = [0] * len(cols)
        hit = None
        for k, c in enumerate(cols):
            if all((c[i] - target[i]).is_zero() for i in range(n)):
                hit = k
                break
        if hit is None:
            raise AssertionError("verbatim permutation lost a column")
        col[hit] = 1
        U.append(col)
    # U as a matrix: output j = sum_k input_k * U[k][j]
    return [[U[j][k] for j in range(len(cols))] for k in range(len(cols))]


def _assemble_transform(n, m, cols, P, lam_cols, lam_signs, lam_src, payload):
    """A (complex n x n) and U (unimodular) with A * input * U = output."""
    total = len(cols)
    zero = cols[0][0] - cols[0][0]
    one = _one_like(zero.re)

    # A is pinned by its action on the C-basis (torus v-parts, lambdas)
    basis = [payload["mu_vparts"][k] for k in range(m)] + list(lam_cols)
    images = []
    for k in range(m):  # torus basis vector -> e_k (complex rows)
        images.append(
            tuple(
                ExactComplex(one if i == k else zero.re - zero.re, zero.im - zero.im)
                for i in range(n)
            )
        )
    for j in range(n - m):  # lambda_j -> e_{m+j}
        images.append(
            tuple(
                ExactComplex(one if i == m + j else zero.re - zero.re, zero.im - zero.im)
                for i in range(n)
            )
        )
    # solve A * basis = images columnwise: A = images_mat * basis_mat^{-1}
    basis_mat = [[basis[j][i] for j in range(n)] for i in range(n)]
    inv = field_inv(basis_mat, is_zero=_cx_is_zero)
    if inv is None:
        raise AssertionError("chosen basis failed to invert")
    images_mat = [[images[j][i] for j in range(n)] for i in range(n)]
    A = _cx_matmul(images_mat, inv)

    # U: columns of the output in terms of input columns
    U = [[0] * (n + m) for _ in range(total)]
    for j in range(n - m):
        U[lam_src[j]][j] = lam_signs[j]
    mu_src = payload["mu_src"]
    floors = payload["r1_floors"] + payload["r2_floors"]
    for k in range(2 * m):
        src = mu_src[k]
        U[src][n - m + k] = 1
        for j in range(n - m):
            U[lam_src[j]][n - m + k] -= lam_signs[j] * floors[k][j]
    # exact verification: A * cols * U == P.matrix_rows()
    prod = _cx_matmul(A, [[cols[j][i] for j in range(total)] for i in range(n)])
    shifted = [
        [
            _sum_cx(_cx_scale(prod[i][t], Fraction(U[t][j])) for t in range(total))
            for j in range(total)
        ]
        for i in range(n)
    ]
    target = P.matrix_rows()
    for i in range(n):
        for j in range(total):
            if not (shifted[i][j] - target[i][j]).is_zero():
                raise AssertionError("transform verification failed")
    return A, U


def _cx_matmul(A, B):
    n = len(A)
    k = len(B)
    mcols = len(B[0])
    out = []
    for i in range(n):
        row = []
        for j in range(mcols):
            acc = None
            for t in range(k):
                term = A[i][t] * B[t][j]
                acc = term if acc is None else acc + term
            row.append(acc)
        out.append(row)
    return out
