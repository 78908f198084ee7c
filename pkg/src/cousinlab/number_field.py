"""Number fields Q(theta) with ordered embeddings and certified arithmetic.

A field is presented by an irreducible integer polynomial; elements are
coordinate vectors over the power basis 1, theta, ..., theta^(d-1).  The
embeddings carry a fixed order so that subset indices mean the same thing
across runs and machines:

    1 .. s            real embeddings, ascending,
    s+1 .. s+t        upper-half-plane complex embeddings, sorted by real
                      part with exact tie-breaks by imaginary part,
    s+t+1 .. s+2t     their conjugates, in the same order.

Real roots are AlgebraicReal values; complex roots are rectangles proved to
hold exactly one root each by an interval Newton contraction, so refining an
embedding is always a certified operation.  Norms come from resultants,
integrality from the characteristic polynomial of multiplication, and the
rank test on unit logarithms from adaptive interval determinants that either
decide or admit they cannot.
"""

import math
from fractions import Fraction

from .errors import PreconditionError, PrecisionExhausted
from ._linalg import field_det
from .exact_numerics import (
    DEFAULT_PRECISION,
    PRECISION_CAP,
    AlgebraicReal,
    ComplexInterval,
    Interval,
    _frac_poly_divmod,
    count_real_roots,
    isolate_real_roots,
    poly_degree,
    poly_eval_fraction,
    poly_is_irreducible,
    poly_primitive,
    poly_squarefree_part,
    poly_trim,
    sign_certified,
    sturm_sequence,
)

# ---------------------------------------------------------------------------
# exact complex-rational helpers (pairs of Fractions)
# ---------------------------------------------------------------------------


def _cplx_add(a, b):
    return (a[0] + b[0], a[1] + b[1])


def _cplx_mul(a, b):
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def _cplx_div(a, b):
    d = b[0] * b[0] + b[1] * b[1]
    if d == 0:
        raise ZeroDivisionError
    return ((a[0] * b[0] + a[1] * b[1]) / d, (a[1] * b[0] - a[0] * b[1]) / d)


def _cplx_poly_eval(coeffs, z):
    acc = (Fraction(0), Fraction(0))
    for c in reversed(coeffs):
        acc = _cplx_add(_cplx_mul(acc, z), (Fraction(c), Fraction(0)))
    return acc


class _RootBox:
    """A rectangle certified to contain exactly one simple root of a poly.

    Kept as exact rational corner data; shrink() runs one certified Newton
    step (exact center evaluation, interval derivative over the whole box)
    and therefore roughly squares the accuracy per call.
    """

    __slots__ = ("poly", "dpoly", "re_lo", "re_hi", "im_lo", "im_hi")

    def __init__(self, poly, re_lo, re_hi, im_lo, im_hi):
        self.poly = poly
        self.dpoly = tuple(i * poly[i] for i in range(1, len(poly)))
        self.re_lo, self.re_hi = Fraction(re_lo), Fraction(re_hi)
        self.im_lo, self.im_hi = Fraction(im_lo), Fraction(im_hi)

    def width(self):
        return max(self.re_hi - self.re_lo, self.im_hi - self.im_lo)

    def center(self):
        return ((self.re_lo + self.re_hi) / 2, (self.im_lo + self.im_hi) / 2)

    def as_complex_interval(self, bits):
        return ComplexInterval(
            Interval.from_endpoints(self.re_lo, self.re_hi, bits),
            Interval.from_endpoints(self.im_lo, self.im_hi, bits),
        )

    def conjugate_box(self):
        return _RootBox(self.poly, self.re_lo, self.re_hi, -self.im_hi, -self.im_lo)

    def _newton_image(self, bits):
        """K(B) = c - f(c)/f'(B) as exact rational corner data, or None."""
        c = self.center()
        fc = _cplx_poly_eval(self.poly, c)
        box = self.as_complex_interval(bits)
        dpoly_iv = _eval_poly_complex_interval(self.dpoly, box, bits)
        den = dpoly_iv.abs2()
        if den.contains_zero():
            return None
        fc_iv = ComplexInterval.from_fractions(fc[0], fc[1], bits)
        step = fc_iv / dpoly_iv
        return (
            c[0] - step.re.hi_fraction(),
            c[0] - step.re.lo_fraction(),
            c[1] - step.im.hi_fraction(),
            c[1] - step.im.lo_fraction(),
        )

    def contains_strictly(self, corners):
        a, b, c, d = corners
        return self.re_lo < a and b < self.re_hi and self.im_lo < c and d < self.im_hi

    def verify(self, bits=DEFAULT_PRECISION):
        """Newton contraction test: image strictly inside the box."""
        img = self._newton_image(bits)
        return img is not None and self.contains_strictly(img)

    def shrink(self, bits):
        """One Newton step; returns True when the box got smaller."""
        img = self._newton_image(bits)
        if img is None:
            return False
        a = max(self.re_lo, img[0])
        b = min(self.re_hi, img[1])
        c = max(self.im_lo, img[2])
        d = min(self.im_hi, img[3])
        if a > b or c > d:
            return False
        if (b - a) + (d - c) >= (self.re_hi - self.re_lo) + (self.im_hi - self.im_lo):
            return False
        self.re_lo, self.re_hi, self.im_lo, self.im_hi = a, b, c, d
        return True

    def refine_to(self, target_width):
        tw = Fraction(target_width)
        need = tw.denominator.bit_length() - tw.numerator.bit_length()
        bits = max(128, 2 * need + 64)
        while self.width() > tw:
            if not self.shrink(bits):
                bits *= 2
                if bits > PRECISION_CAP:
                    raise PrecisionExhausted(
                        "complex root refinement stalled", PRECISION_CAP
                    )


def _eval_poly_complex_interval(coeffs, z, bits):
    acc = ComplexInterval.from_fractions(Fraction(0), Fraction(0), bits)
    for c in reversed(coeffs):
        acc = acc * z + ComplexInterval.from_fractions(Fraction(c), Fraction(0), bits)
    return acc


def _initial_complex_boxes(poly, t):
    """Certified upper-half-plane root boxes from float seeds.

    mpmath supplies approximations; each becomes a candidate rectangle that
    must pass the Newton contraction test before being trusted.  Boxes are
    grown, or precision raised, until exactly t disjoint verified boxes with
    certified positive imaginary part emerge.
    """
    import mpmath

    d = poly_degree(poly)
    for dps in (50, 120, 300):
        mpmath.mp.dps = dps
        try:
            roots = mpmath.polyroots(
                [int(c) for c in reversed(poly)], maxsteps=200, extraprec=200
            )
        except mpmath.libmp.NoConvergence:
            continue
        upper = [r for r in roots if mpmath.im(r) > mpmath.mpf(10) ** (-dps // 2)]
        if len(upper) != t:
            continue
        boxes = []
        ok = True
        for r in upper:
            cre = Fraction(*mpmath.libmp.to_rational(mpmath.re(r)._mpf_))
            cim = Fraction(*mpmath.libmp.to_rational(mpmath.im(r)._mpf_))
            placed = False
            rad = Fraction(1, 10 ** max(dps - 16, 8))
            for _ in range(60):
                box = _RootBox(poly, cre - rad, cre + rad, cim - rad, cim + rad)
                if box.im_lo > 0 and box.verify(bits=max(64, 4 * dps)):
                    boxes.append(box)
                    placed = True
                    break
                rad *= 4
            if not placed:
                ok = False
                break
        if not ok:
            continue
        # pairwise disjoint rectangles prove the roots are distinct
        disjoint = True
        for i in range(len(boxes)):
            for j in range(i + 1, len(boxes)):
                a, b = boxes[i], boxes[j]
                if not (
                    a.re_hi < b.re_lo
                    or b.re_hi < a.re_lo
                    or a.im_hi < b.im_lo
                    or b.im_hi < a.im_lo
                ):
                    disjoint = False
        if disjoint:
            return boxes
    raise PrecisionExhausted("could not certify complex root boxes", PRECISION_CAP)


def _order_upper_boxes(poly, boxes):
    """Sort upper-half root boxes by (re, im) with exact tie handling.

    Real parts of distinct roots can coincide; deciding that exactly uses
    the sum polynomial S(s) = Res_x(poly(x), poly(s - x)), whose roots are
    all pairwise sums of roots, in particular every 2*Re(root).
    """
    sum_poly_cache = {}

    def sum_poly():
        if "S" not in sum_poly_cache:
            import sympy

            x, sv = sympy.symbols("x s")
            p = sympy.Poly(list(reversed(poly)), x)
            q = sympy.Poly(
                sympy.expand(p.as_expr().subs(x, sv - x)), x
            )
            S = sympy.resultant(p.as_expr(), q.as_expr(), x)
            Sp = sympy.Poly(S, sv)
            coeffs = [int(c) for c in reversed(Sp.all_coeffs())]
            sf = poly_squarefree_part(coeffs)
            sum_poly_cache["S"] = (sf, sturm_sequence(sf))
        return sum_poly_cache["S"]

    def re_equal(a, b):
        """Exact equality of real parts of the roots in boxes a and b."""
        while True:
            if a.re_hi < b.re_lo or b.re_hi < a.re_lo:
                return False
            sf, chain = sum_poly()
            lo = 2 * min(a.re_lo, b.re_lo)
            hi = 2 * max(a.re_hi, b.re_hi)
            # nudge endpoints off roots of sf
            while poly_eval_fraction(sf, lo) == 0:
                lo -= Fraction(1, 10**6)
            while poly_eval_fraction(sf, hi) == 0:
                hi += Fraction(1, 10**6)
            if count_real_roots(sf, lo, hi, chain) == 1:
                return True
            w = max(a.width(), b.width())
            a.refine_to(w / 16)
            b.refine_to(w / 16)

    def less_than(a, b):
        while True:
            if a.re_hi < b.re_lo:
                return True
            if b.re_hi < a.re_lo:
                return False
            if re_equal(a, b):
                # equal real parts: distinct upper-half roots then differ in im
                while not (a.im_hi < b.im_lo or b.im_hi < a.im_lo):
                    w = max(a.width(), b.width())
                    a.refine_to(w / 16)
                    b.refine_to(w / 16)
                return a.im_hi < b.im_lo
            w = max(a.width(), b.width())
            a.refine_to(w / 16)
            b.refine_to(w / 16)

    out = list(boxes)
    # insertion sort with the certified comparator; t is tiny
    for i in range(1, len(out)):
        j = i
        while j > 0 and less_than(out[j], out[j - 1]):
            out[j], out[j - 1] = out[j - 1], out[j]
            j -= 1
    return out


# ---------------------------------------------------------------------------
# NumberField / FieldElement
# ---------------------------------------------------------------------------


class NumberField:
    """Q(theta) for theta a root of an irreducible integer polynomial.

    ``minpoly`` is stored primitive (content 1, positive leading
    coefficient), coefficients ascending.  ``real_roots`` and the certified
    complex boxes fix the embedding order documented in the module
    docstring.
    """

    def __init__(self, minpoly):
        c = poly_primitive(poly_trim(tuple(int(a) for a in minpoly)))
        if poly_degree(c) < 2:
            raise PreconditionError("field polynomial must have degree >= 2")
        if not poly_is_irreducible(c):
            raise PreconditionError(f"polynomial {list(c)} is reducible over Q")
        self.minpoly = c
        self.degree = poly_degree(c)
        brackets = isolate_real_roots(c)
        self.s = len(brackets)
        if (self.degree - self.s) % 2:
            raise AssertionError("real root count parity violated")
        self.t = (self.degree - self.s) // 2
        self.real_roots = [
            AlgebraicReal(c, lo, hi, _skip_checks=True) for lo, hi in brackets
        ]
        if self.t:
            boxes = _initial_complex_boxes(c, self.t)
            self._complex_boxes = _order_upper_boxes(c, boxes)
        else:
            self._complex_boxes = []

    @property
    def signature(self):
        return (self.s, self.t)

    @property
    def n_embeddings(self):
        return self.s + 2 * self.t

    def __repr__(self):
        return f"NumberField({list(self.minpoly)}, signature=({self.s},{self.t}))"

    def __eq__(self, other):
        return isinstance(other, NumberField) and self.minpoly == other.minpoly

    def __hash__(self):
        return hash(self.minpoly)

    # -- element constructors ------------------------------------------------

    def element(self, coords):
        coords = [Fraction(x) for x in coords]
        if len(coords) > self.degree:
            # reduce higher powers instead of refusing
            _, rem = _frac_poly_divmod(coords, [Fraction(a) for a in self.minpoly])
            coords = rem
        coords += [Fraction(0)] * (self.degree - len(coords))
        return FieldElement(self, tuple(coords))

    def zero(self):
        return self.element([])

    def one(self):
        return self.element([1])

    def gen(self):
        return self.element([0, 1])

    def from_rational(self, q):
        return self.element([Fraction(q)])

    # -- embeddings ----------------------------------------------------------

    def embedding_count(self):
        return self.n_embeddings

    def _upper_box(self, r, target_width=None):
        box = self._complex_boxes[r]
        if target_width is not None:
            box.refine_to(target_width)
        return box


class FieldElement:
    """An element of a NumberField in power-basis coordinates."""

    __slots__ = ("field", "coords")

    def __init__(self, field, coords):
        self.field = field
        self.coords = coords

    def _check_same_field(self, other):
        if self.field.minpoly != other.field.minpoly:
            raise PreconditionError("elements live in different fields")

    def is_zero(self):
        return all(c == 0 for c in self.coords)

    def is_rational(self):
        return all(c == 0 for c in self.coords[1:])

    def as_rational(self):
        if not self.is_rational():
            raise PreconditionError("element is not rational")
        return self.coords[0]

    def __repr__(self):
        return f"FieldElement({[str(c) for c in self.coords]})"

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.field.minpoly == other.field.minpoly and self.coords == other.coords
        if isinstance(other, (int, Fraction)):
            return self.is_rational() and self.coords[0] == Fraction(other)
        return NotImplemented

    def __hash__(self):
        return hash((self.field.minpoly, self.coords))

    # -- arithmetic ----------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, FieldElement):
            self._check_same_field(other)
            return other
        if isinstance(other, (int, Fraction)):
            return self.field.from_rational(other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return FieldElement(
            self.field, tuple(a + b for a, b in zip(self.coords, o.coords))
        )

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(self.field, tuple(-a for a in self.coords))

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return FieldElement(
            self.field, tuple(a - b for a, b in zip(self.coords, o.coords))
        )

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        a, b = self.coords, o.coords
        prod = [Fraction(0)] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    if y:
                        prod[i + j] += x * y
        _, rem = _frac_poly_divmod(prod, [Fraction(c) for c in self.field.minpoly])
        rem += [Fraction(0)] * (self.field.degree - len(rem))
        return FieldElement(self.field, tuple(rem[: self.field.degree]))

    __rmul__ = __mul__

    def inverse(self):
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero field element")
        # extended Euclid: g*self + h*minpoly = 1 in Q[x]
        f = [Fraction(c) for c in self.field.minpoly]
        g = list(self.coords)
        r0, r1 = f, g
        s0, s1 = [Fraction(0)], [Fraction(1)]

        def poly_sub_scaled(a, q, b):
            # a - q*b for coefficient lists
            qb = [Fraction(0)] * (len(q) + len(b) - 1) if q and b else []
            for i, x in enumerate(q):
                if x:
                    for j, y in enumerate(b):
                        if y:
                            qb[i + j] += x * y
            n = max(len(a), len(qb))
            out = [
                (a[i] if i < len(a) else 0) - (qb[i] if i < len(qb) else 0)
                for i in range(n)
            ]
            while out and out[-1] == 0:
                out.pop()
            return out

        while True:
            r1t = [x for x in r1]
            while r1t and r1t[-1] == 0:
                r1t.pop()
            if not r1t:
                raise AssertionError("gcd hit zero before a unit (reducible minpoly?)")
            if len(r1t) == 1:
                inv_c = 1 / r1t[0]
                inv = [x * inv_c for x in s1]
                break
            q, r = _frac_poly_divmod(r0, r1t)
            r0, r1 = r1t, r
            s0, s1 = s1, poly_sub_scaled(s0, q, s1)
        return self.field.element(inv)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result = self.field.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # -- invariants ----------------------------------------------------------

    def _coord_poly(self):
        return poly_trim(self.coords)

    def norm(self):
        """Norm over Q, exact, via the resultant with the field polynomial."""
        g = self._coord_poly()
        if not g:
            return Fraction(0)
        if len(g) == 1:
            return g[0] ** self.field.degree
        import sympy

        x = sympy.Symbol("x")
        f_poly = sympy.Poly(list(reversed(self.field.minpoly)), x)
        g_poly = sympy.Poly([sympy.Rational(c) for c in reversed(g)], x)
        res = sympy.resultant(f_poly.as_expr(), g_poly.as_expr(), x)
        lc = self.field.minpoly[-1]
        val = sympy.Rational(res) / sympy.Integer(lc) ** (len(g) - 1)
        return Fraction(val.p, val.q)

    def multiplication_matrix(self):
        """Matrix of y -> x*y on the power basis, columns = images of basis."""
        d = self.field.degree
        cols = []
        basis_power = self.field.one()
        for _ in range(d):
            prod = self * basis_power
            cols.append(prod.coords)
            basis_power = basis_power * self.field.gen()
        return [[cols[j][i] for j in range(d)] for i in range(d)]

    def trace(self):
        M = self.multiplication_matrix()
        return sum(M[i][i] for i in range(len(M)))

    def charpoly(self):
        """Characteristic polynomial of multiplication, ascending Fractions."""
        import sympy

        M = sympy.Matrix(
            [[sympy.Rational(x) for x in row] for row in self.multiplication_matrix()]
        )
        cp = M.charpoly()
        coeffs = [Fraction(c.p, c.q) for c in reversed(cp.all_coeffs())]
        return tuple(coeffs)

    def is_integral(self):
        """Algebraic integer test: characteristic polynomial lies in Z[x]."""
        return all(c.denominator == 1 for c in self.charpoly())

    # -- embeddings ----------------------------------------------------------

    def embed(self, index, precision_bits=DEFAULT_PRECISION):
        """Certified box for the image under embedding ``index`` (1-based).

        Real embeddings give a rectangle with an exactly-zero imaginary
        part.  Conjugate embeddings (index > s+t) are computed as exact
        mirror images of their upper-half partners.
        """
        fld = self.field
        s, t = fld.s, fld.t
        if not 1 <= index <= s + 2 * t:
            raise PreconditionError(f"embedding index {index} out of range")
        if self.is_rational():
            q = self.coords[0]
            return ComplexInterval.from_fractions(q, Fraction(0), precision_bits + 8)
        g = self._coord_poly()
        target = Fraction(1, 2**precision_bits)
        if index <= s:
            root = fld.real_roots[index - 1]
            bits = max(precision_bits + 16, 96)
            while True:
                iv = root.refine(bits)
                val = _eval_poly_real(g, iv)
                if val.width_fraction() <= target:
                    return ComplexInterval(val, Interval.zero(val.precision_bits))
                bits *= 2
                if bits > PRECISION_CAP:
                    raise PrecisionExhausted("embedding refinement stalled", bits)
        conj = index > s + t
        r = (index - s - 1) if not conj else (index - s - t - 1)
        box = fld._upper_box(r)
        bits = max(precision_bits + 16, 96)
        while True:
            box.refine_to(Fraction(1, 2 ** min(bits, PRECISION_CAP)))
            z = box.as_complex_interval(bits)
            val = _eval_poly_complex_interval(g, z, bits)
            if val.width_fraction() <= target:
                return val.conj() if conj else val
            bits *= 2
            if bits > PRECISION_CAP:
                raise PrecisionExhausted("embedding refinement stalled", bits)


def _eval_poly_real(coeffs, x):
    acc = Interval.zero(x.precision_bits)
    for c in reversed(coeffs):
        acc = acc * x + Interval.from_fraction(c, x.precision_bits)
    return acc


# ---------------------------------------------------------------------------
# spec-level operations
# ---------------------------------------------------------------------------


def make_field(minpoly):
    return NumberField(minpoly)


def embed(x, index, precision_bits=DEFAULT_PRECISION):
    return x.embed(index, precision_bits)


def is_unit(x):
    """True iff x is an algebraic integer of norm +-1.

    Raises on non-integral input rather than answering a different
    question silently.
    """
    if not x.is_integral():
        raise PreconditionError("is_unit needs an algebraic integer")
    n = x.norm()
    return n == 1 or n == -1


def is_totally_positive(x):
    """Certified positivity of every real embedding (vacuous when s = 0)."""
    fld = x.field
    if x.is_zero():
        return False if fld.s else True
    g = x._coord_poly()
    for root in fld.real_roots:
        expr = _horner_symbolic(g, root)
        if sign_certified(expr) <= 0:
            return False
    return True


def _horner_symbolic(coeffs, theta):
    acc = Fraction(coeffs[-1])
    for c in reversed(coeffs[:-1]):
        acc = acc * theta + Fraction(c)
    return acc


def _interval_det(rows):
    """Containment-correct determinant of a square Interval matrix.

    Permutation expansion for small sizes, interval elimination with
    mignitude pivoting beyond that; returns None when a pivot straddles
    zero (undecided at this precision).
    """
    n = len(rows)
    if n == 0:
        return None
    if n <= 5:
        import itertools

        bits = rows[0][0].precision_bits
        total = Interval.zero(bits)
        for perm in itertools.permutations(range(n)):
            sign = _perm_sign(perm)
            term = Interval.from_fraction(sign, bits)
            for i in range(n):
                term = term * rows[i][perm[i]]
            total = total + term
        return total
    M = [list(r) for r in rows]
    bits = M[0][0].precision_bits
    det = Interval.from_fraction(1, bits)
    for c in range(n):
        pivot = None
        best = None
        for i in range(c, n):
            e = M[i][c]
            if not e.contains_zero():
                mig = min(abs(e.lo_fraction()), abs(e.hi_fraction()))
                if best is None or mig > best:
                    best, pivot = mig, i
        if pivot is None:
            return None
        if pivot != c:
            M[c], M[pivot] = M[pivot], M[c]
            det = -det
        det = det * M[c][c]
        for i in range(c + 1, n):
            f = M[i][c] / M[c][c]
            M[i] = [a - f * b for a, b in zip(M[i], M[c])]
    return det


def _perm_sign(perm):
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j = i
        clen = 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            clen += 1
        if clen % 2 == 0:
            sign = -sign
    return sign


def log_rank_check(gens, s=None, start_bits=96, cap_bits=8192):
    """Does the s x len(gens) matrix of real-embedding logs have rank s?

    True is certified by an interval determinant of some column subset
    excluding zero.  False is certified only structurally (fewer than s
    generators differ from 1).  Anything else is an honest "undecided":
    rank deficiency of transcendental logs cannot be confirmed by shrinking
    boxes, so the caller gets PrecisionExhausted instead of a guess.  The
    default cap is deliberately modest because a genuinely dependent set
    would otherwise burn the full precision budget before admitting defeat.
    """
    gens = list(gens)
    if not gens:
        return s == 0 if s is not None else True
    fld = gens[0].field
    if s is None:
        s = fld.s
    for u in gens:
        if not is_unit(u):
            raise PreconditionError("log_rank_check needs verified units")
        if not is_totally_positive(u):
            raise PreconditionError("log_rank_check needs totally positive units")
    if s == 0:
        return True
    live = [u for u in gens if not (u.is_rational() and u.coords[0] == 1)]
    if len(live) < s:
        return False
    import itertools

    bits = start_bits
    while bits <= cap_bits:
        cols = []
        usable = True
        for u in live:
            col = []
            for i in range(1, s + 1):
                box = u.embed(i, bits)
                if box.re.lo_fraction() <= 0:
                    usable = False  # box too coarse for a log yet
                    break
                col.append(box.re.log())
            if not usable:
                break
            cols.append(col)
        if not usable:
            bits *= 2
            continue
        for subset in itertools.combinations(range(len(live)), s):
            rows = [[cols[j][i] for j in subset] for i in range(s)]
            det = _interval_det(rows)
            if det is not None and not det.contains_zero():
                return True
        bits *= 2
    raise PrecisionExhausted(
        "log-rank undecided: determinants kept straddling zero", cap_bits
    )
