"""Exact real and interval arithmetic underneath every certified claim.

Three layers live here.

* ``Interval`` / ``ComplexInterval``: outward-rounded multiprecision
  enclosures on top of gmpy2.  Every arithmetic operation rounds the lower
  endpoint down and the upper endpoint up, so the true real (or the true
  rectangle in the complex case) is contained in the result no matter how
  many operations are chained.

* ``AlgebraicReal``: a real algebraic number represented by its integer
  minimal polynomial plus an isolating interval with rational endpoints.
  Refinement never leaves exact arithmetic: bisection steps test the sign of
  the minimal polynomial at dyadic rationals, and the interval-Newton fast
  path converts its certified mpfr enclosure back to rationals.

* ``sign_certified``: exact sign of a polynomial combination of algebraic
  numbers.  Zero is only ever reported after an exact reduction (modulo the
  minimal polynomial, or through a resultant-derived minimal polynomial in
  the multi-generator case), never because an interval got small.

Precision is counted in bits throughout.  Adaptive loops double the working
precision until a comparison is decided, up to ``PRECISION_CAP``; hitting the
cap raises :class:`~cousinlab.errors.PrecisionExhausted` rather than guessing.
"""

from fractions import Fraction

import gmpy2
from gmpy2 import mpfr, mpq

from .errors import PrecisionExhausted, PreconditionError, ResourceLimit

DEFAULT_PRECISION = 256
PRECISION_CAP = 1_000_000

_RationalLike = (int, Fraction)


def _ctx_down(bits):
    return gmpy2.context(precision=bits, round=gmpy2.RoundDown)


def _ctx_up(bits):
    return gmpy2.context(precision=bits, round=gmpy2.RoundUp)


def _to_mpq(x):
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    if isinstance(x, int):
        return mpq(x)
    raise TypeError(f"expected int or Fraction, got {type(x).__name__}")


def mpfr_to_fraction(x):
    """Exact Fraction equal to the mpfr value (mpfr values are dyadic)."""
    num, den = x.as_integer_ratio()
    # as_integer_ratio hands back gmpy2 integers; keep Fractions pure-int so
    # exact comparisons and floor arithmetic never mix scalar types
    return Fraction(int(num), int(den))


def _neg_exact(x):
    # gmpy2 operators round into the *current* context, so a bare -x on a
    # 256-bit value would quietly come back at the default 53 bits; negation
    # at the operand's own precision is always exact
    with gmpy2.context(precision=x.precision):
        return -x


class Interval:
    """Closed interval [lo, hi] with mpfr endpoints, guaranteed lo <= hi.

    Containment is the invariant: any function of intervals returns an
    interval containing the image of every selection of points from its
    arguments.  Endpoints carry ``precision_bits`` of mantissa; mixed
    precisions widen to the larger.
    """

    __slots__ = ("lo", "hi", "precision_bits")

    def __init__(self, lo, hi, precision_bits):
        if not (gmpy2.is_finite(lo) and gmpy2.is_finite(hi)):
            raise PrecisionExhausted("non-finite interval endpoint", precision_bits)
        if lo > hi:
            raise ValueError(f"inverted interval [{lo}, {hi}]")
        self.lo = lo
        self.hi = hi
        self.precision_bits = precision_bits

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_fraction(cls, x, bits=DEFAULT_PRECISION):
        q = _to_mpq(x)
        with _ctx_down(bits):
            lo = mpfr(q)
        with _ctx_up(bits):
            hi = mpfr(q)
        return cls(lo, hi, bits)

    @classmethod
    def from_endpoints(cls, lo, hi, bits=DEFAULT_PRECISION):
        """Outward-rounded interval from two rationals lo <= hi."""
        if lo > hi:
            raise ValueError("lo > hi")
        with _ctx_down(bits):
            flo = mpfr(_to_mpq(lo))
        with _ctx_up(bits):
            fhi = mpfr(_to_mpq(hi))
        return cls(flo, fhi, bits)

    @classmethod
    def zero(cls, bits=DEFAULT_PRECISION):
        return cls(mpfr(0, bits), mpfr(0, bits), bits)

    # -- queries -----------------------------------------------------------

    def lo_fraction(self):
        return mpfr_to_fraction(self.lo)

    def hi_fraction(self):
        return mpfr_to_fraction(self.hi)

    def mid_fraction(self):
        return (self.lo_fraction() + self.hi_fraction()) / 2

    def width_fraction(self):
        return self.hi_fraction() - self.lo_fraction()

    def width_upper(self):
        with _ctx_up(self.precision_bits):
            return gmpy2.sub(self.hi, self.lo)

    def rel_width(self):
        """Width divided by the smallest absolute endpoint; inf if 0 inside."""
        if self.contains_zero():
            if self.lo == 0 and self.hi == 0:
                return Fraction(0)
            return None
        w = self.width_fraction()
        m = min(abs(self.lo_fraction()), abs(self.hi_fraction()))
        return w / m

    def contains_zero(self):
        return self.lo <= 0 <= self.hi

    def contains_fraction(self, x):
        q = _to_mpq(x)
        return self.lo <= q <= self.hi

    def is_positive(self):
        return self.lo > 0

    def is_negative(self):
        return self.hi < 0

    def sign(self):
        """+1 / -1 when certified, 0 for the exact point zero, None otherwise."""
        if self.lo > 0:
            return 1
        if self.hi < 0:
            return -1
        if self.lo == 0 and self.hi == 0:
            return 0
        return None

    def overlaps(self, other):
        return self.lo <= other.hi and other.lo <= self.hi

    def __contains__(self, x):
        if isinstance(x, _RationalLike):
            return self.contains_fraction(x)
        if isinstance(x, Interval):
            return self.lo <= x.lo and x.hi <= self.hi
        return NotImplemented

    def __repr__(self):
        return f"Interval[{self.lo!s}, {self.hi!s}]@{self.precision_bits}"

    # -- arithmetic --------------------------------------------------------

    def _bits_with(self, other):
        if isinstance(other, Interval):
            return max(self.precision_bits, other.precision_bits)
        return self.precision_bits

    @staticmethod
    def _coerce(x, bits):
        if isinstance(x, Interval):
            return x
        if isinstance(x, _RationalLike):
            return Interval.from_fraction(x, bits)
        return None

    def __neg__(self):
        return Interval(_neg_exact(self.hi), _neg_exact(self.lo), self.precision_bits)

    def __abs__(self):
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        b = self.precision_bits
        return Interval(mpfr(0, b), max(_neg_exact(self.lo), self.hi), b)

    def __add__(self, other):
        bits = self._bits_with(other)
        o = self._coerce(other, bits)
        if o is None:
            return NotImplemented
        with _ctx_down(bits):
            lo = gmpy2.add(self.lo, o.lo)
        with _ctx_up(bits):
            hi = gmpy2.add(self.hi, o.hi)
        return Interval(lo, hi, bits)

    __radd__ = __add__

    def __sub__(self, other):
        bits = self._bits_with(other)
        o = self._coerce(other, bits)
        if o is None:
            return NotImplemented
        with _ctx_down(bits):
            lo = gmpy2.sub(self.lo, o.hi)
        with _ctx_up(bits):
            hi = gmpy2.sub(self.hi, o.lo)
        return Interval(lo, hi, bits)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        bits = self._bits_with(other)
        o = self._coerce(other, bits)
        if o is None:
            return NotImplemented
        pairs = ((self.lo, o.lo), (self.lo, o.hi), (self.hi, o.lo), (self.hi, o.hi))
        with _ctx_down(bits):
            lo = min(gmpy2.mul(a, b) for a, b in pairs)
        with _ctx_up(bits):
            hi = max(gmpy2.mul(a, b) for a, b in pairs)
        return Interval(lo, hi, bits)

    __rmul__ = __mul__

    def __truediv__(self, other):
        bits = self._bits_with(other)
        o = self._coerce(other, bits)
        if o is None:
            return NotImplemented
        if o.contains_zero():
            raise ZeroDivisionError("division by interval containing zero")
        pairs = ((self.lo, o.lo), (self.lo, o.hi), (self.hi, o.lo), (self.hi, o.hi))
        with _ctx_down(bits):
            lo = min(gmpy2.div(a, b) for a, b in pairs)
        with _ctx_up(bits):
            hi = max(gmpy2.div(a, b) for a, b in pairs)
        return Interval(lo, hi, bits)

    def __rtruediv__(self, other):
        bits = self.precision_bits
        o = self._coerce(other, bits)
        if o is None:
            return NotImplemented
        return o / self

    def sqr(self):
        bits = self.precision_bits
        a = abs(self)
        with _ctx_down(bits):
            lo = gmpy2.mul(a.lo, a.lo)
        with _ctx_up(bits):
            hi = gmpy2.mul(a.hi, a.hi)
        return Interval(lo, hi, bits)

    def sqrt(self):
        if self.lo < 0:
            raise ValueError("sqrt of interval reaching below zero")
        bits = self.precision_bits
        with _ctx_down(bits):
            lo = gmpy2.sqrt(self.lo)
        with _ctx_up(bits):
            hi = gmpy2.sqrt(self.hi)
        return Interval(lo, hi, bits)

    def exp(self):
        bits = self.precision_bits
        with _ctx_down(bits):
            lo = gmpy2.exp(self.lo)
        with _ctx_up(bits):
            hi = gmpy2.exp(self.hi)
        return Interval(lo, hi, bits)

    def log(self):
        if self.lo <= 0:
            raise ValueError("log of interval reaching zero")
        bits = self.precision_bits
        with _ctx_down(bits):
            lo = gmpy2.log(self.lo)
        with _ctx_up(bits):
            hi = gmpy2.log(self.hi)
        return Interval(lo, hi, bits)

    def union(self, other):
        bits = self._bits_with(other)
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi), bits)

    def intersect(self, other):
        lo = max(self.lo, other.lo)
        hi = min(self.hi, other.hi)
        if lo > hi:
            return None
        return Interval(lo, hi, self._bits_with(other))

    def __float__(self):
        return (float(self.lo) + float(self.hi)) / 2


def pi_interval(bits=DEFAULT_PRECISION):
    with _ctx_down(bits):
        lo = gmpy2.const_pi()
    with _ctx_up(bits):
        hi = gmpy2.const_pi()
    return Interval(lo, hi, bits)


def _sin_point(x, bits):
    # sin is correctly rounded by mpfr under a directed-rounding context
    with _ctx_down(bits):
        lo = gmpy2.sin(x)
    with _ctx_up(bits):
        hi = gmpy2.sin(x)
    return lo, hi


def _cos_point(x, bits):
    with _ctx_down(bits):
        lo = gmpy2.cos(x)
    with _ctx_up(bits):
        hi = gmpy2.cos(x)
    return lo, hi


def sin_interval(x):
    """Enclosure of sin over the interval x.

    Conservative near critical points: whenever pi/2 + k*pi possibly meets x,
    the corresponding extremum +/-1 is included.  Always correct, at worst a
    little wide.
    """
    bits = x.precision_bits
    if x.width_fraction() >= 7:  # more than a full period: give up precisely
        return Interval(mpfr(-1, bits), mpfr(1, bits), bits)
    pi = pi_interval(bits)
    half = Interval.from_fraction(Fraction(1, 2), bits)
    # critical points at (k + 1/2) * pi; find integer k range possibly meeting x
    k_lo_f = (Interval(x.lo, x.lo, bits) / pi - half).lo_fraction()
    k_hi_f = (Interval(x.hi, x.hi, bits) / pi - half).hi_fraction()
    import math

    k_lo = math.floor(k_lo_f)
    k_hi = math.ceil(k_hi_f)
    slo_d, _ = _sin_point(x.lo, bits)
    _, slo_u = _sin_point(x.lo, bits)
    shi_d, _ = _sin_point(x.hi, bits)
    _, shi_u = _sin_point(x.hi, bits)
    lo = min(slo_d, shi_d)
    hi = max(slo_u, shi_u)
    for k in range(k_lo, k_hi + 1):
        crit = pi * (Fraction(2 * k + 1, 2))
        ci = crit.intersect(Interval(x.lo, x.hi, bits))
        if ci is not None:
            if k % 2 == 0:
                hi = max(hi, mpfr(1, bits))
            else:
                lo = min(lo, mpfr(-1, bits))
    return Interval(lo, hi, bits)


def cos_interval(x):
    bits = x.precision_bits
    pi = pi_interval(bits)
    shifted = x + pi * Fraction(1, 2)
    return sin_interval(shifted)


def sinpi_interval(t):
    """Enclosure of sin(pi*t) for an interval t (t need not be reduced)."""
    return sin_interval(pi_interval(t.precision_bits) * t)


class ComplexInterval:
    """Axis-aligned rectangle re + i*im with Interval components."""

    __slots__ = ("re", "im")

    def __init__(self, re, im):
        self.re = re
        self.im = im

    @classmethod
    def from_fractions(cls, re, im, bits=DEFAULT_PRECISION):
        return cls(Interval.from_fraction(re, bits), Interval.from_fraction(im, bits))

    @property
    def precision_bits(self):
        return max(self.re.precision_bits, self.im.precision_bits)

    def __repr__(self):
        return f"ComplexInterval({self.re!r}, {self.im!r})"

    @staticmethod
    def _coerce(x, bits):
        if isinstance(x, ComplexInterval):
            return x
        if isinstance(x, Interval):
            return ComplexInterval(x, Interval.zero(x.precision_bits))
        if isinstance(x, _RationalLike):
            return ComplexInterval.from_fractions(x, Fraction(0), bits)
        return None

    def __neg__(self):
        return ComplexInterval(-self.re, -self.im)

    def conj(self):
        return ComplexInterval(self.re, -self.im)

    def __add__(self, other):
        o = self._coerce(other, self.precision_bits)
        if o is None:
            return NotImplemented
        return ComplexInterval(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other, self.precision_bits)
        if o is None:
            return NotImplemented
        return ComplexInterval(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other, self.precision_bits)
        if o is None:
            return NotImplemented
        return ComplexInterval(
            self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re
        )

    __rmul__ = __mul__

    def abs2(self):
        return self.re.sqr() + self.im.sqr()

    def abs(self):
        return self.abs2().sqrt()

    def __truediv__(self, other):
        o = self._coerce(other, self.precision_bits)
        if o is None:
            return NotImplemented
        d = o.abs2()
        if d.contains_zero():
            raise ZeroDivisionError("division by complex interval containing zero")
        n = self * o.conj()
        return ComplexInterval(n.re / d, n.im / d)

    def contains_zero(self):
        return self.re.contains_zero() and self.im.contains_zero()

    def width_fraction(self):
        return max(self.re.width_fraction(), self.im.width_fraction())


def exp_2pi_i(t):
    """Enclosure of exp(2*pi*i*t) for a real interval t."""
    two_pi_t = pi_interval(t.precision_bits) * t * 2
    return ComplexInterval(cos_interval(two_pi_t), sin_interval(two_pi_t))


# ---------------------------------------------------------------------------
# integer/rational polynomial helpers (coefficients ascending: c[i] * x**i)
# ---------------------------------------------------------------------------


def poly_trim(c):
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def poly_degree(c):
    return len(c) - 1


def poly_eval_fraction(c, x):
    """Horner evaluation with exact rationals."""
    acc = Fraction(0)
    for coeff in reversed(c):
        acc = acc * x + coeff
    return acc


def poly_eval_interval(c, x):
    acc = Interval.zero(x.precision_bits)
    for coeff in reversed(c):
        acc = acc * x + Interval.from_fraction(coeff, x.precision_bits)
    return acc


def poly_eval_complex_interval(c, z):
    bits = z.precision_bits
    acc = ComplexInterval.from_fractions(Fraction(0), Fraction(0), bits)
    for coeff in reversed(c):
        acc = acc * z + ComplexInterval.from_fractions(coeff, Fraction(0), bits)
    return acc


def poly_derivative(c):
    return tuple(i * c[i] for i in range(1, len(c)))


def poly_content(c):
    import math

    g = 0
    for coeff in c:
        g = math.gcd(g, int(coeff))
    return g


def poly_primitive(c):
    g = poly_content(c)
    if g == 0:
        return poly_trim(c)
    sign = 1 if c[-1] > 0 else -1
    return tuple(coeff * sign // g for coeff in c)


def _frac_poly_divmod(a, b):
    """Division with remainder of Fraction coefficient lists (ascending)."""
    a = [Fraction(x) for x in a]
    b = [Fraction(x) for x in b]
    while b and b[-1] == 0:
        b.pop()
    if not b:
        raise ZeroDivisionError("poly division by zero")
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 0)
    r = a[:]
    while len(r) >= len(b) and any(r):
        while r and r[-1] == 0:
            r.pop()
        if len(r) < len(b):
            break
        k = len(r) - len(b)
        factor = r[-1] / b[-1]
        q[k] = factor
        for i in range(len(b)):
            r[k + i] -= factor * b[i]
        r.pop()
    while r and r[-1] == 0:
        r.pop()
    return q, r


def sturm_sequence(c):
    """Sturm chain of an integer/rational polynomial, as Fraction tuples."""
    p0 = [Fraction(x) for x in c]
    p1 = [Fraction(x) for x in poly_derivative(c)]
    seq = [p0, p1]
    while seq[-1]:
        _, rem = _frac_poly_divmod(seq[-2], seq[-1])
        if not rem:
            break
        seq.append([-x for x in rem])
    return [tuple(p) for p in seq if p]


def _sign_variations(seq, x):
    signs = []
    for p in seq:
        v = poly_eval_fraction(p, x)
        if v != 0:
            signs.append(1 if v > 0 else -1)
    count = 0
    for a, b in zip(signs, signs[1:]):
        if a != b:
            count += 1
    return count


def count_real_roots(c, lo, hi, chain=None):
    """Number of distinct real roots of c in (lo, hi], via Sturm."""
    if chain is None:
        chain = sturm_sequence(c)
    return _sign_variations(chain, Fraction(lo)) - _sign_variations(chain, Fraction(hi))


def cauchy_root_bound(c):
    """Rational B with every real root of c inside [-B, B]."""
    c = poly_trim(c)
    lead = abs(c[-1])
    if lead == 0:
        raise ValueError("zero polynomial")
    m = max(abs(x) for x in c[:-1]) if len(c) > 1 else 0
    return Fraction(m, lead) + 1


def isolate_real_roots(c):
    """Disjoint rational intervals (lo, hi], one per distinct real root, sorted.

    Endpoints are never roots of c except possibly hi on the final
    half-open interval; a post-pass nudges endpoints off roots so that
    downstream sign tests are unambiguous.
    """
    c = poly_trim(c)
    if poly_degree(c) < 1:
        return []
    chain = sturm_sequence(c)
    bound = cauchy_root_bound(c)
    lo, hi = -bound, bound
    # ensure the outer endpoints are not roots (Cauchy bound is strict)
    total = count_real_roots(c, lo, hi, chain)
    out = []

    def recurse(a, b, n):
        if n == 0:
            return
        if n == 1:
            out.append((a, b))
            return
        mid = (a + b) / 2
        # nudge off a root at the midpoint
        while poly_eval_fraction(c, mid) == 0:
            mid += (b - a) / 1024
        left = count_real_roots(c, a, mid, chain)
        recurse(a, mid, left)
        recurse(mid, b, n - left)

    recurse(lo, hi, total)
    # shrink each bracket until the endpoints are certainly not roots and the
    # bracket shows a sign change (simple roots of squarefree polynomials)
    refined = []
    for a, b in out:
        while poly_eval_fraction(c, a) == 0:
            a -= Fraction(1, 1024)
        while poly_eval_fraction(c, b) == 0:
            b += Fraction(1, 1024)
        while count_real_roots(c, a, b, chain) != 1:
            # only possible if the nudges above let a neighbor leak in
            b = (a + b) / 2
            while poly_eval_fraction(c, b) == 0:
                b += (b - a) / 1024
        refined.append((a, b))
    return sorted(refined)


def poly_is_irreducible(c):
    """Irreducibility over Q of an integer polynomial (content ignored)."""
    import sympy

    x = sympy.Symbol("x")
    p = sympy.Poly(list(reversed(c)), x, domain=sympy.ZZ)
    if p.degree() < 1:
        return False
    return p.is_irreducible


def poly_squarefree_part(c):
    import sympy

    x = sympy.Symbol("x")
    p = sympy.Poly(list(reversed(c)), x, domain=sympy.QQ)
    sf = p.quo(sympy.gcd(p, p.diff(x)))
    coeffs = [Fraction(a.p, a.q) for a in reversed(sf.all_coeffs())]
    import math

    den = math.lcm(*(f.denominator for f in coeffs))
    ints = [int(f * den) for f in coeffs]
    return poly_primitive(ints)


# ---------------------------------------------------------------------------
# AlgebraicReal
# ---------------------------------------------------------------------------


class AlgebraicReal:
    """A real algebraic number: irreducible integer minpoly + isolating bracket.

    The bracket (self._lo, self._hi) has rational endpoints that are not
    roots, contains exactly one root of the minimal polynomial (verified by a
    Sturm count at construction), and only ever shrinks.  Degree-1 inputs are
    stored exactly and short-circuit everything.

    Instances are immutable in value; refinement mutates only the cached
    bracket.  Hash and equality are by the root itself, not the bracket.
    """

    __slots__ = ("minpoly", "_lo", "_hi", "_chain", "_rational")

    def __init__(self, minpoly, lo, hi, _skip_checks=False):
        c = poly_primitive(poly_trim(minpoly))
        if poly_degree(c) < 1:
            raise PreconditionError("minimal polynomial must have degree >= 1")
        lo = Fraction(lo)
        hi = Fraction(hi)
        if poly_degree(c) == 1:
            # exact rational: -c0/c1
            self.minpoly = c
            val = Fraction(-c[0], c[1])
            self._lo = self._hi = val
            self._rational = val
            self._chain = None
            return
        self._rational = None
        if not _skip_checks:
            if not poly_is_irreducible(c):
                raise PreconditionError(
                    f"reducible polynomial {list(c)}; pass an irreducible factor"
                )
        self.minpoly = c
        self._chain = sturm_sequence(c)
        if poly_eval_fraction(c, lo) == 0 or poly_eval_fraction(c, hi) == 0:
            raise PreconditionError("isolating endpoints must not be roots")
        n = count_real_roots(c, lo, hi, self._chain)
        if n != 1:
            raise PreconditionError(
                f"interval ({lo}, {hi}) isolates {n} roots, need exactly 1"
            )
        self._lo, self._hi = lo, hi

    # -- constructors --------------------------------------------------------

    @classmethod
    def from_rational(cls, q):
        q = Fraction(q)
        return cls((-q.numerator, q.denominator), q - 1, q + 1)

    @classmethod
    def roots_of(cls, minpoly):
        """All real roots of an irreducible integer polynomial, ascending."""
        c = poly_primitive(poly_trim(minpoly))
        if not poly_is_irreducible(c):
            raise PreconditionError("reducible polynomial")
        if poly_degree(c) == 1:
            return [cls.from_rational(Fraction(-c[0], c[1]))]
        return [cls(c, lo, hi, _skip_checks=True) for lo, hi in isolate_real_roots(c)]

    # -- basics --------------------------------------------------------------

    @property
    def degree(self):
        return poly_degree(self.minpoly)

    def is_rational(self):
        return self._rational is not None

    def as_rational(self):
        return self._rational

    def bracket(self):
        return (self._lo, self._hi)

    def __repr__(self):
        mid = float((self._lo + self._hi) / 2)
        return f"AlgebraicReal({list(self.minpoly)}, ~{mid:.12g})"

    def __float__(self):
        iv = self.refine(64)
        return float(iv)

    # -- refinement ----------------------------------------------------------

    def _bisect_once(self):
        mid = (self._lo + self._hi) / 2
        v = poly_eval_fraction(self.minpoly, mid)
        if v == 0:  # impossible for irreducible degree >= 2
            raise AssertionError("rational root of irreducible polynomial")
        vlo = poly_eval_fraction(self.minpoly, self._lo)
        if (v > 0) == (vlo > 0):
            self._lo = mid
        else:
            self._hi = mid

    def _newton_step(self, bits):
        """One interval-Newton contraction; returns True if it tightened."""
        lo = Interval.from_endpoints(self._lo, self._lo, bits)
        hi = Interval.from_endpoints(self._hi, self._hi, bits)
        box = lo.union(hi)
        dp = poly_derivative(self.minpoly)
        dbox = poly_eval_interval(dp, box)
        if dbox.contains_zero():
            return False
        mid = self.mid_exact()
        pm = poly_eval_fraction(self.minpoly, mid)
        pmi = Interval.from_fraction(pm, bits)
        newton = Interval.from_fraction(mid, bits) - pmi / dbox
        new_lo = max(self._lo, newton.lo_fraction())
        new_hi = min(self._hi, newton.hi_fraction())
        if new_lo > new_hi:
            # numerical emptiness can only come from outward rounding; the
            # root is still inside the old bracket, so just report no progress
            return False
        if new_hi - new_lo >= self._hi - self._lo:
            return False
        # keep exactness: accept only if endpoints are not roots
        if (
            poly_eval_fraction(self.minpoly, new_lo) == 0
            or poly_eval_fraction(self.minpoly, new_hi) == 0
        ):
            return False
        if count_real_roots(self.minpoly, new_lo, new_hi, self._chain) != 1:
            return False
        self._lo, self._hi = new_lo, new_hi
        return True

    def mid_exact(self):
        return (self._lo + self._hi) / 2

    def refine(self, target_bits=DEFAULT_PRECISION):
        """Outward-rounded Interval of width at most 2**-target_bits."""
        if target_bits > PRECISION_CAP:
            raise PrecisionExhausted("refine target beyond cap", PRECISION_CAP)
        if self._rational is not None:
            return Interval.from_fraction(self._rational, max(target_bits, 64))
        goal = Fraction(1, 2**target_bits)
        while self._hi - self._lo > goal:
            work = max(2 * target_bits + 64, 128)
            if not self._newton_step(work):
                self._bisect_once()
        bits = max(target_bits + 8, 64)
        return Interval.from_endpoints(self._lo, self._hi, bits)

    # -- comparisons ---------------------------------------------------------

    def compare_fraction(self, q):
        """Certified sign of (self - q)."""
        q = Fraction(q)
        if self._rational is not None:
            d = self._rational - q
            return 0 if d == 0 else (1 if d > 0 else -1)
        # an irreducible polynomial of degree >= 2 has no rational roots
        while self._lo < q < self._hi:
            self._bisect_once()
        if q <= self._lo:
            return 1
        return -1

    def same_root(self, other):
        """Exact equality test with another AlgebraicReal."""
        if not isinstance(other, AlgebraicReal):
            return NotImplemented
        if self._rational is not None or other._rational is not None:
            if self._rational is not None and other._rational is not None:
                return self._rational == other._rational
            rat = self if self._rational is not None else other
            alg = other if self._rational is not None else self
            return alg.compare_fraction(rat._rational) == 0
        if self.minpoly != other.minpoly:
            # distinct irreducible minimal polynomials share no roots
            return False
        lo = max(self._lo, other._lo)
        hi = min(self._hi, other._hi)
        if lo >= hi:
            return False
        return count_real_roots(self.minpoly, lo, hi, self._chain) == 1

    def __eq__(self, other):
        if isinstance(other, AlgebraicReal):
            return self.same_root(other)
        if isinstance(other, _RationalLike):
            return self.compare_fraction(Fraction(other)) == 0
        return NotImplemented

    def __hash__(self):
        # coarse but consistent: hash by minpoly only
        return hash(self.minpoly)

    def __lt__(self, other):
        if isinstance(other, _RationalLike):
            return self.compare_fraction(Fraction(other)) < 0
        if isinstance(other, AlgebraicReal):
            if self.same_root(other):
                return False
            while True:
                if self._hi <= other._lo:
                    return True
                if other._hi <= self._lo:
                    return False
                if self._hi - self._lo > other._hi - other._lo:
                    self._bisect_once() if self._rational is None else None
                else:
                    other._bisect_once() if other._rational is None else None
                if self._rational is not None and other._rational is not None:
                    return self._rational < other._rational
        return NotImplemented

    # -- symbolic arithmetic (lazy expressions for sign_certified) -----------

    def __add__(self, other):
        return SymExpr("+", self, other)

    def __radd__(self, other):
        return SymExpr("+", other, self)

    def __sub__(self, other):
        return SymExpr("-", self, other)

    def __rsub__(self, other):
        return SymExpr("-", other, self)

    def __mul__(self, other):
        return SymExpr("*", self, other)

    def __rmul__(self, other):
        return SymExpr("*", other, self)

    def __pow__(self, n):
        return SymExpr("**", self, n)

    def __neg__(self):
        return SymExpr("-", 0, self)


class SymExpr:
    """Tiny expression tree over AlgebraicReal and rational leaves.

    Exists so that ``sign_certified(sqrt2 * sqrt2 - 2)`` reads naturally; the
    tree is evaluated exactly by :func:`sign_certified`.
    """

    __slots__ = ("op", "left", "right")

    def __init__(self, op, left, right):
        for side in (left, right):
            if not isinstance(side, (SymExpr, AlgebraicReal, int, Fraction)):
                raise TypeError(f"bad operand {side!r}")
        if op == "**" and not (isinstance(right, int) and right >= 0):
            raise PreconditionError("powers must be non-negative integers")
        self.op = op
        self.left = left
        self.right = right

    def __add__(self, other):
        return SymExpr("+", self, other)

    def __radd__(self, other):
        return SymExpr("+", other, self)

    def __sub__(self, other):
        return SymExpr("-", self, other)

    def __rsub__(self, other):
        return SymExpr("-", other, self)

    def __mul__(self, other):
        return SymExpr("*", self, other)

    def __rmul__(self, other):
        return SymExpr("*", other, self)

    def __pow__(self, n):
        return SymExpr("**", self, n)

    def __neg__(self):
        return SymExpr("-", 0, self)

    def leaves(self):
        out = []

        def walk(node):
            if isinstance(node, SymExpr):
                walk(node.left)
                if node.op != "**":
                    walk(node.right)
            elif isinstance(node, AlgebraicReal):
                out.append(node)

        walk(self)
        return out


MAX_EXPR_DEGREE = 10**6


def _expr_as_poly_in(node, theta):
    """Expression -> Fraction coefficient tuple in the single generator theta."""

    def mul(a, b):
        out = [Fraction(0)] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    if y:
                        out[i + j] += x * y
        return out

    def add(a, b, sign=1):
        n = max(len(a), len(b))
        return [
            (a[i] if i < len(a) else 0) + sign * (b[i] if i < len(b) else 0)
            for i in range(n)
        ]

    def walk(node):
        if isinstance(node, _RationalLike):
            return [Fraction(node)]
        if isinstance(node, AlgebraicReal):
            if node._rational is not None:
                return [node._rational]
            return [Fraction(0), Fraction(1)]  # theta itself
        if node.op == "+":
            return add(walk(node.left), walk(node.right))
        if node.op == "-":
            return add(walk(node.left), walk(node.right), -1)
        if node.op == "*":
            p = mul(walk(node.left), walk(node.right))
            if len(p) > MAX_EXPR_DEGREE:
                raise ResourceLimit("expression degree overflow")
            return p
        if node.op == "**":
            base = walk(node.left)
            out = [Fraction(1)]
            for _ in range(node.right):
                out = mul(out, base)
                if len(out) > MAX_EXPR_DEGREE:
                    raise ResourceLimit("expression degree overflow")
            return out
        raise AssertionError(node.op)

    return walk(node)


def _reduce_mod_minpoly(coeffs, minpoly):
    mp = [Fraction(c) for c in minpoly]
    _, rem = _frac_poly_divmod(coeffs, mp)
    return rem


def _interval_eval_expr(node, bits):
    if isinstance(node, _RationalLike):
        return Interval.from_fraction(node, bits)
    if isinstance(node, AlgebraicReal):
        return node.refine(bits)
    if node.op == "+":
        return _interval_eval_expr(node.left, bits) + _interval_eval_expr(node.right, bits)
    if node.op == "-":
        return _interval_eval_expr(node.left, bits) - _interval_eval_expr(node.right, bits)
    if node.op == "*":
        return _interval_eval_expr(node.left, bits) * _interval_eval_expr(node.right, bits)
    if node.op == "**":
        acc = Interval.from_fraction(1, bits)
        base = _interval_eval_expr(node.left, bits)
        for _ in range(node.right):
            acc = acc * base
        return acc
    raise AssertionError(node.op)


def _sympy_root_of(a):
    """Map an AlgebraicReal onto the matching sympy CRootOf.

    Matching is by index in the ascending list of real roots; the index is
    the Sturm count of roots at or below the bracket's left endpoint, which
    avoids comparing sympy roots against our (possibly huge) rational
    endpoints.
    """
    import sympy

    x = sympy.Symbol("x")
    poly = sympy.Poly(list(reversed(a.minpoly)), x)
    bound = cauchy_root_bound(a.minpoly)
    lo, _ = a.bracket()
    idx = count_real_roots(a.minpoly, -bound, lo, a._chain)
    roots = poly.real_roots()
    return roots[idx]


def _expr_to_sympy(node):
    import sympy

    if isinstance(node, _RationalLike):
        return sympy.Rational(Fraction(node))
    if isinstance(node, AlgebraicReal):
        if node._rational is not None:
            return sympy.Rational(node._rational)
        return _sympy_root_of(node)
    ops = {
        "+": lambda a, b: a + b,
        "-": lambda a, b: a - b,
        "*": lambda a, b: a * b,
    }
    if node.op == "**":
        return _expr_to_sympy(node.left) ** node.right
    return ops[node.op](_expr_to_sympy(node.left), _expr_to_sympy(node.right))


def sign_certified(expr, start_bits=DEFAULT_PRECISION, cap_bits=PRECISION_CAP):
    """Exact sign (-1, 0, +1) of a polynomial combination of algebraic numbers.

    Zero is certified by exact reduction modulo the minimal polynomial when a
    single generator is involved, and through the resultant-based minimal
    polynomial of the value otherwise.  Nonzero signs come from interval
    refinement, which terminates once zero has been excluded exactly.
    """
    if isinstance(expr, _RationalLike):
        v = Fraction(expr)
        return 0 if v == 0 else (1 if v > 0 else -1)
    if isinstance(expr, AlgebraicReal):
        if expr._rational is not None:
            return sign_certified(expr._rational)
        return expr.compare_fraction(Fraction(0))
    if not isinstance(expr, SymExpr):
        raise TypeError(f"cannot take sign of {type(expr).__name__}")

    leaves = expr.leaves()
    irr = [a for a in leaves if a._rational is None]
    distinct = []
    for a in irr:
        if not any(a.same_root(b) for b in distinct):
            distinct.append(a)

    if len(distinct) <= 1:
        theta = distinct[0] if distinct else None
        coeffs = _expr_as_poly_in(expr, theta)
        if theta is not None:
            coeffs = _reduce_mod_minpoly(coeffs, theta.minpoly)
        coeffs = [c for c in coeffs]
        if not any(coeffs):
            return 0
        if theta is None or len(coeffs) == 1:
            v = coeffs[0]
            return 1 if v > 0 else -1
        # nonzero value: refine until the interval shows it
        bits = start_bits
        while True:
            iv = poly_eval_interval(coeffs, theta.refine(bits))
            s = iv.sign()
            if s is not None and s != 0:
                return s
            if bits >= cap_bits:
                raise PrecisionExhausted("sign undecided at cap", cap_bits)
            bits *= 2

    # multiple independent generators: interval first, exact fallback
    degree_product = 1
    for a in distinct:
        degree_product *= a.degree
    if degree_product > 64:
        raise ResourceLimit(
            f"combined degree {degree_product} beyond the multi-generator limit"
        )
    bits = start_bits
    while bits <= max(start_bits, 4096):
        iv = _interval_eval_expr(expr, bits)
        s = iv.sign()
        if s is not None and s != 0:
            return s
        bits *= 2
    # exact zero test via the minimal polynomial of the value
    import sympy

    val = _expr_to_sympy(expr)
    x = sympy.Symbol("x")
    mp = sympy.minimal_polynomial(val, x)
    if mp == x:
        return 0
    bits = 4096
    while True:
        iv = _interval_eval_expr(expr, bits)
        s = iv.sign()
        if s is not None and s != 0:
            return s
        if bits >= cap_bits:
            raise PrecisionExhausted("sign undecided at cap", cap_bits)
        bits *= 2
