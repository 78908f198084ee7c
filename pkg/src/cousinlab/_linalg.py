"""Exact linear algebra over big integers and over generic exact fields.

Two independent halves:

* Smith normal form and integer kernels over Python ints.  These back the
  lattice questions (does an integer vector satisfy a rational linear
  system) where rounding is not an option.

* Gaussian elimination parameterized by the scalar type.  Any scalar with
  +, -, *, / and a trustworthy zero test works: Fraction, number field
  elements, complexified field elements.  Rank, solve, inverse,
  determinant all share the one elimination core.

Matrices are plain lists of lists, rows first.  Nothing here mutates its
arguments.
"""

from fractions import Fraction


def _default_is_zero(x):
    return x == 0


# ---------------------------------------------------------------------------
# integer layer
# ---------------------------------------------------------------------------


def identity_matrix(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def mat_mul(A, B):
    if not A or not B:
        return []
    n, k, m = len(A), len(B), len(B[0])
    assert len(A[0]) == k, "dimension mismatch"
    return [
        [sum(A[i][t] * B[t][j] for t in range(k)) for j in range(m)] for i in range(n)
    ]


def mat_vec(A, x):
    return [sum(row[j] * x[j] for j in range(len(x))) for row in A]


def smith_normal_form(A):
    """U, D, V with U A V = D diagonal, U and V unimodular over Z.

    The diagonal entries are non-negative and satisfy the divisibility
    chain d1 | d2 | ... .  The input is any integer matrix, including
    empty and non-square shapes.
    """
    n = len(A)
    m = len(A[0]) if n else 0
    D = [[int(x) for x in row] for row in A]
    U = identity_matrix(n)
    V = identity_matrix(m)

    def swap_rows(i, j):
        D[i], D[j] = D[j], D[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in D:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(dst, src, c):
        # row_dst += c * row_src
        D[dst] = [a + c * b for a, b in zip(D[dst], D[src])]
        U[dst] = [a + c * b for a, b in zip(U[dst], U[src])]

    def add_col(dst, src, c):
        for row in D:
            row[dst] += c * row[src]
        for row in V:
            row[dst] += c * row[src]

    def negate_row(i):
        D[i] = [-a for a in D[i]]
        U[i] = [-a for a in U[i]]

    t = 0
    while t < n and t < m:
        # find a nonzero pivot of least absolute value in the trailing block
        pivot = None
        best = None
        for i in range(t, n):
            for j in range(t, m):
                v = abs(D[i][j])
                if v and (best is None or v < best):
                    best, pivot = v, (i, j)
        if pivot is None:
            break
        i, j = pivot
        swap_rows(t, i)
        swap_cols(t, j)
        # chip away at the row and column until both are clear below/right
        while True:
            dirty = False
            for i in range(t + 1, n):
                if D[i][t]:
                    q = D[i][t] // D[t][t]
                    add_row(i, t, -q)
                    if D[i][t]:
                        swap_rows(t, i)
                        dirty = True
            for j in range(t + 1, m):
                if D[t][j]:
                    q = D[t][j] // D[t][t]
                    add_col(j, t, -q)
                    if D[t][j]:
                        swap_cols(t, j)
                        dirty = True
            if not dirty:
                break
        # pivot must divide everything in the remaining block
        stray = None
        for i in range(t + 1, n):
            for j in range(t + 1, m):
                if D[i][j] % D[t][t]:
                    stray = i
                    break
            if stray is not None:
                break
        if stray is not None:
            add_row(t, stray, 1)
            continue  # redo this pivot position
        if D[t][t] < 0:
            negate_row(t)
        t += 1
    return U, D, V


def integer_kernel(A):
    """Basis of the integer kernel {x in Z^m : A x = 0} of an integer matrix.

    Returned as a list of length-m integer vectors; empty list when the
    kernel is trivial.  Correctness: with U A V = D, A x = 0 iff
    D (V^-1 x) = 0 iff V^-1 x lives on the zero columns of D, so the
    kernel is spanned by the corresponding columns of V.
    """
    n = len(A)
    m = len(A[0]) if n else 0
    if m == 0:
        return []
    if n == 0:
        return [row[:] for row in identity_matrix(m)]
    _, D, V = smith_normal_form(A)
    r = 0
    while r < min(n, m) and D[r][r] != 0:
        r += 1
    return [[V[i][j] for i in range(m)] for j in range(r, m)]


def integer_kernel_of_rational(A):
    """Integer kernel of a matrix with Fraction entries."""
    import math

    if not A or not A[0]:
        m = len(A[0]) if A else 0
        return [row[:] for row in identity_matrix(m)]
    den = 1
    for row in A:
        for x in row:
            den = math.lcm(den, Fraction(x).denominator)
    B = [[int(Fraction(x) * den) for x in row] for row in A]
    return integer_kernel(B)


def is_unimodular(A):
    n = len(A)
    if any(len(row) != n for row in A):
        return False
    return abs(_int_det(A)) == 1


def _int_det(A):
    """Determinant of an integer matrix by fraction-free Bareiss elimination."""
    n = len(A)
    if n == 0:
        return 1
    M = [[int(x) for x in row] for row in A]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if M[k][k] == 0:
            for i in range(k + 1, n):
                if M[i][k]:
                    M[k], M[i] = M[i], M[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
            M[i][k] = 0
        prev = M[k][k]
    return sign * M[n - 1][n - 1]


def int_det(A):
    return _int_det(A)


# ---------------------------------------------------------------------------
# generic field layer
# ---------------------------------------------------------------------------


def field_rref(A, is_zero=None):
    """Reduced row echelon form over a generic exact field.

    Returns (R, pivots, swaps) where R is the reduced matrix, pivots the
    list of pivot column indices, and swaps the number of row exchanges
    performed (for determinant signs).
    """
    if is_zero is None:
        is_zero = _default_is_zero
    R = [list(row) for row in A]
    n = len(R)
    m = len(R[0]) if n else 0
    pivots = []
    swaps = 0
    r = 0
    for c in range(m):
        pivot_row = None
        for i in range(r, n):
            if not is_zero(R[i][c]):
                pivot_row = i
                break
        if pivot_row is None:
            continue
        if pivot_row != r:
            R[r], R[pivot_row] = R[pivot_row], R[r]
            swaps += 1
        pv = R[r][c]
        R[r] = [x / pv for x in R[r]]
        for i in range(n):
            if i != r and not is_zero(R[i][c]):
                f = R[i][c]
                R[i] = [a - f * b for a, b in zip(R[i], R[r])]
        pivots.append(c)
        r += 1
        if r == n:
            break
    return R, pivots, swaps


def field_rank(A, is_zero=None):
    if not A or not A[0]:
        return 0
    _, pivots, _ = field_rref(A, is_zero)
    return len(pivots)


def field_solve(A, b, is_zero=None):
    """One solution x of A x = b over the field, or None if inconsistent.

    Free variables are set to zero, where "zero" is materialized as
    pivot - pivot from an actual matrix entry.
    """
    if is_zero is None:
        is_zero = _default_is_zero
    n = len(A)
    m = len(A[0]) if n else 0
    aug = [list(A[i]) + [b[i]] for i in range(n)]
    R, pivots, _ = field_rref(aug, is_zero)
    for i in range(len(pivots) - 1, -1, -1):
        if pivots[i] == m:
            return None  # pivot in the constants column
    # find a scalar zero to fill free slots
    some = None
    for row in A:
        for x in row:
            some = x
            break
        if some is not None:
            break
    if some is None:
        some = b[0]
    zero = some - some
    x = [zero] * m
    for i, c in enumerate(pivots):
        x[c] = R[i][m]
    return x


def field_kernel(A, is_zero=None):
    """Basis of the right kernel of A over the field."""
    if is_zero is None:
        is_zero = _default_is_zero
    n = len(A)
    m = len(A[0]) if n else 0
    if n == 0 or m == 0:
        # need one and zero scalars; without entries there is no way to
        # make them, so this degenerate case only supports empty output
        if m == 0:
            return []
        raise ValueError("cannot produce kernel basis without any matrix entries")
    R, pivots, _ = field_rref(A, is_zero)
    some = A[0][0]
    zero = some - some
    pivot_entry = R[0][pivots[0]] if pivots else None
    if pivot_entry is None:
        one = None  # full kernel, build unit vectors lazily below
    else:
        one = pivot_entry  # rref pivots are exactly 1
    free = [c for c in range(m) if c not in pivots]
    if one is None:
        # A is the zero matrix: synthesize one = x/x would divide by zero,
        # so walk the field through Fraction-like construction instead
        raise ValueError("kernel of an identically zero matrix is everything")
    basis = []
    for fc in free:
        v = [zero] * m
        v[fc] = one
        for i, pc in enumerate(pivots):
            v[pc] = zero - R[i][fc]
        basis.append(v)
    return basis


def field_det(A, is_zero=None):
    """Determinant over a generic exact field; A square and non-empty."""
    if is_zero is None:
        is_zero = _default_is_zero
    n = len(A)
    assert n > 0 and all(len(row) == n for row in A)
    M = [list(row) for row in A]
    zero = M[0][0] - M[0][0]
    sign = 1
    det = None
    for c in range(n):
        pivot_row = None
        for i in range(c, n):
            if not is_zero(M[i][c]):
                pivot_row = i
                break
        if pivot_row is None:
            return zero
        if pivot_row != c:
            M[c], M[pivot_row] = M[pivot_row], M[c]
            sign = -sign
        pv = M[c][c]
        det = pv if det is None else det * pv
        for i in range(c + 1, n):
            if not is_zero(M[i][c]):
                f = M[i][c] / pv
                M[i] = [a - f * b for a, b in zip(M[i], M[c])]
    if sign < 0:
        det = zero - det
    return det


def field_inv(A, is_zero=None):
    """Inverse of a square matrix over a generic exact field, or None."""
    if is_zero is None:
        is_zero = _default_is_zero
    n = len(A)
    assert all(len(row) == n for row in A)
    if n == 0:
        return []
    zero = A[0][0] - A[0][0]
    # build one by dividing a nonzero entry by itself
    one = None
    for row in A:
        for x in row:
            if not is_zero(x):
                one = x / x
                break
        if one is not None:
            break
    if one is None:
        return None
    aug = [list(A[i]) + [one if i == j else zero for j in range(n)] for i in range(n)]
    R, pivots, _ = field_rref(aug, is_zero)
    if pivots[:n] != list(range(n)):
        return None
    return [row[n:] for row in R[:n]]
