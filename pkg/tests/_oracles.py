"""Independent oracles used across the test suite.

Everything here is deliberately dumb and slow: pure Fraction bisection,
brute-force enumeration, mpmath cross-checks.  None of it imports package
internals, so agreement between these and the library is meaningful.
"""

from fractions import Fraction


def bisect_root(f, lo, hi, bits):
    """Root of a sign-changing callable on [lo, hi] to width 2**-bits.

    Plain bisection over Fractions.  Returns (lo, hi) with f(lo), f(hi) of
    opposite sign and hi - lo <= 2**-bits.
    """
    lo, hi = Fraction(lo), Fraction(hi)
    flo = f(lo)
    fhi = f(hi)
    assert flo != 0 and fhi != 0 and (flo > 0) != (fhi > 0), "bad oracle bracket"
    goal = Fraction(1, 2**bits)
    while hi - lo > goal:
        mid = (lo + hi) / 2
        fm = f(mid)
        if fm == 0:
            eps = (hi - lo) / 1024
            return (mid - eps, mid + eps)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
    return (lo, hi)


def sqrt_oracle(n, bits=128):
    """Bracket for sqrt(n), n a positive rational."""
    n = Fraction(n)
    hi = max(n, Fraction(1)) + 1
    return bisect_root(lambda x: x * x - n, Fraction(0), hi, bits)


def poly_root_oracle(coeffs_ascending, lo, hi, bits=128):
    """Bracket a polynomial root by bisection, coefficients ascending."""

    def f(x):
        acc = Fraction(0)
        for c in reversed(coeffs_ascending):
            acc = acc * x + c
        return acc

    return bisect_root(f, lo, hi, bits)


# frozen reference digits (computed once with this oracle at 400 bits and
# checked against mpmath.mp.sqrt / polyroots at dps=60)
SQRT2_DIGITS = "1.41421356237309504880168872420969807856967187537694"
PLASTIC_DIGITS = "1.32471795724474602596090885447809734073440405690173"
SQRT3_DIGITS = "1.73205080756887729352744634150587236694280525381038"


def digits_to_bracket(digits, slack_last=2):
    """Turn a decimal string into a (lo, hi) Fraction bracket.

    The true value is assumed to round to these digits, so it lies within
    one unit of the last printed place; slack_last widens that a little to
    be safe about the final rounding.
    """
    frac = Fraction(digits)
    places = len(digits.split(".")[1])
    eps = Fraction(slack_last, 10**places)
    return (frac - eps, frac + eps)
