"""Hodge-theoretic invariants of solvmanifolds built from number fields.

The input is a field K with s real and t complex places plus s totally
positive units spanning a rank-s subgroup; the manifold they define has
its Dolbeault and de Rham dimensions controlled entirely by which
products of embeddings of the units equal 1.  Everything downstream
(diamond, Betti numbers, condition (C), the decomposition check) reduces
to that one predicate, so the predicate is where the rigor is spent.

Equality to 1 is decided exactly.  A subset product of embeddings is a
root of the monic integer polynomial whose roots are all products of
that subset size; the polynomial's coefficients are recovered from
certified interval arithmetic (each coefficient is pinned to the unique
integer its interval contains).  If x - 1 does not divide it, the answer
is no.  If it does, write it as (x-1)^k h with h(1) != 0; once the
product's interval box is small enough that h cannot vanish on it, the
answer is a certified yes.  Both directions terminate at finite
precision, and nothing is ever concluded from closeness alone.

Admissibility checking is deliberately shallow: units, total positivity,
log rank, and lattice stability are verified exactly because they are
checkable; proper discontinuity of the resulting action is part of the
construction's theory and is not re-derived here.  ``validate=False``
admits synthetic data (still over a genuine field, still integral) so
that the counting formulas can be probed on inadmissible examples.
"""

import itertools
import math
from fractions import Fraction

from ._linalg import field_inv
from .errors import PreconditionError, PrecisionExhausted
from .exact_numerics import ComplexInterval, PRECISION_CAP
from .number_field import (
    FieldElement,
    NumberField,
    is_totally_positive,
    is_unit,
    log_rank_check,
)


def _is_int(x):
    return isinstance(x, int) and not isinstance(x, bool)


def _ceil_fraction(q):
    return -((-q.numerator) // q.denominator)


def _floor_fraction(q):
    return q.numerator // q.denominator


class CharacterSpec:
    """A pair of index sets (I, J), I in {1..s+t} and J in {1..t}.

    Stored sorted; ordering and hashing are by the sorted tuples so
    enumerations and audit listings are reproducible.
    """

    __slots__ = ("I", "J")

    def __init__(self, I, J):
        I = tuple(sorted(I))
        J = tuple(sorted(J))
        for name, idxs in (("I", I), ("J", J)):
            for x in idxs:
                if not _is_int(x) or x < 1:
                    raise ValueError(f"{name} must contain positive integers")
            if len(set(idxs)) != len(idxs):
                raise ValueError(f"{name} has repeated indices")
        object.__setattr__(self, "I", I)
        object.__setattr__(self, "J", J)

    def __setattr__(self, name, value):
        raise AttributeError("CharacterSpec is immutable")

    def key(self):
        return (self.I, self.J)

    def __eq__(self, other):
        if not isinstance(other, CharacterSpec):
            return NotImplemented
        return self.I == other.I and self.J == other.J

    def __hash__(self):
        return hash((self.I, self.J))

    def __repr__(self):
        return f"CharacterSpec(I={list(self.I)}, J={list(self.J)})"


class OTDatum:
    """A number field with signature (s, t), s >= 1, t >= 1, plus s units.

    ``unit_gens`` must be totally positive algebraic-integer units whose
    real-embedding logs have rank s; ``lattice`` is an optional basis of
    a full-rank additive subgroup stable under multiplication by every
    generator (the power basis when omitted).  All of that is verified
    exactly on construction.

    ``validate=False`` skips the admissibility checks (unit group rank,
    total positivity, generator count, lattice stability) while keeping
    the structural ones; it exists so the counting formulas can be
    exercised on synthetic data, and such a datum is marked by
    ``validated = False`` in every report.
    """

    def __init__(self, field, unit_gens, lattice=None, validate=True):
        if not isinstance(field, NumberField):
            raise PreconditionError("field must be a NumberField")
        if field.s < 1 or field.t < 1:
            raise PreconditionError(
                f"need a signature with s >= 1 and t >= 1, got ({field.s}, {field.t})"
            )
        gens = tuple(unit_gens)
        if not gens:
            raise PreconditionError("at least one unit generator is required")
        for u in gens:
            if not isinstance(u, FieldElement) or u.field != field:
                raise PreconditionError("generators must be elements of the field")
            if not u.is_integral():
                raise PreconditionError(
                    "generators must be algebraic integers (even unvalidated data)"
                )
        self.field = field
        self.s = field.s
        self.t = field.t
        self.unit_gens = gens
        self.validated = bool(validate)

        d = field.degree
        if lattice is None:
            basis = []
            power = field.one()
            for _ in range(d):
                basis.append(power)
                power = power * field.gen()
            self.lattice = tuple(basis)
            lattice_given = False
        else:
            self.lattice = tuple(lattice)
            lattice_given = True
            if len(self.lattice) != d:
                raise PreconditionError(f"lattice basis must have {d} vectors")
            for v in self.lattice:
                if not isinstance(v, FieldElement) or v.field != field:
                    raise PreconditionError("lattice vectors must lie in the field")

        if validate:
            if len(gens) != self.s:
                raise PreconditionError(
                    f"need exactly s = {self.s} generators, got {len(gens)}"
                )
            for u in gens:
                if not is_unit(u):
                    raise PreconditionError(f"{u!r} is not a unit")
                if not is_totally_positive(u):
                    raise PreconditionError(f"{u!r} is not totally positive")
            if not log_rank_check(gens, self.s):
                raise PreconditionError(
                    "generator logs do not have full rank s; the group they "
                    "generate is too small"
                )
            if lattice_given or True:
                self._check_lattice_stability()

        self._subset_cache = {}
        self._resolvent_cache = {}
        self._ntriv_cache = {}
        self._full_count_cache = {}

    def _check_lattice_stability(self):
        B = [list(v.coords) for v in self.lattice]
        Binv = field_inv(B, is_zero=lambda x: x == 0)
        if Binv is None:
            raise PreconditionError("lattice basis is not full rank")
        for u in self.unit_gens:
            for v in self.lattice:
                image = (u * v).coords
                for j in range(len(B)):
                    coeff = sum(image[r] * Binv[r][j] for r in range(len(B)))
                    if coeff.denominator != 1:
                        raise PreconditionError(
                            f"lattice is not stable: {u!r} * {v!r} leaves the span"
                        )

    def __repr__(self):
        flag = "" if self.validated else ", unvalidated"
        return (
            f"OTDatum(signature=({self.s},{self.t}), "
            f"gens={len(self.unit_gens)}{flag})"
        )


# ---------------------------------------------------------------------------
# the one predicate: a product of distinct embeddings equals 1
# ---------------------------------------------------------------------------


def _unique_int_in(iv):
    """The single integer an interval pins down, or None."""
    lo = _ceil_fraction(iv.lo_fraction())
    hi = _floor_fraction(iv.hi_fraction())
    if lo == hi:
        return lo
    return None


def _resolvent_factored(datum, gen_pos, r):
    """(k, h): the integer polynomial with all r-subset products of
    embeddings of generator gen_pos as roots, split as (x-1)^k h(x).

    Coefficients are symmetric integer functions of the embeddings, so
    each is certified by shrinking its interval around a unique integer.
    """
    key = (gen_pos, r)
    cached = datum._resolvent_cache.get(key)
    if cached is not None:
        return cached
    u = datum.unit_gens[gen_pos]
    d = datum.field.n_embeddings
    bits = 192
    while True:
        boxes = [u.embed(i, bits) for i in range(1, d + 1)]
        one = ComplexInterval.from_fractions(Fraction(1), Fraction(0), bits)
        coeffs = [one]
        for T in itertools.combinations(range(d), r):
            z = one
            for i in T:
                z = z * boxes[i]
            # multiply the accumulated polynomial by (x - z)
            nxt = [(-z) * coeffs[0]]
            for i in range(1, len(coeffs)):
                nxt.append(coeffs[i - 1] + (-z) * coeffs[i])
            nxt.append(coeffs[-1])
            coeffs = nxt
        ints = []
        for c in coeffs[:-1]:
            if not c.im.contains_fraction(Fraction(0)):
                ints = None
                break
            val = _unique_int_in(c.re)
            if val is None:
                ints = None
                break
            ints.append(val)
        if ints is not None:
            g = ints + [1]
            break
        if bits >= PRECISION_CAP:
            raise PrecisionExhausted(
                "resolvent coefficients undecided", cap_bits=bits
            )
        bits = min(2 * bits, PRECISION_CAP)
    # peel off every (x - 1) factor
    k = 0
    h = list(g)
    while sum(h) == 0 and len(h) > 1:
        quotient = [0] * (len(h) - 1)
        acc = 0
        for i in range(len(h) - 1, 0, -1):
            acc += h[i]
            quotient[i - 1] = acc
        h = quotient
        k += 1
    result = (k, tuple(h))
    datum._resolvent_cache[key] = result
    return result


def _poly_on_box(coeffs, box, bits):
    acc = ComplexInterval.from_fractions(Fraction(coeffs[-1]), Fraction(0), bits)
    for c in reversed(coeffs[:-1]):
        acc = acc * box + ComplexInterval.from_fractions(
            Fraction(c), Fraction(0), bits
        )
    return acc


def _gen_product_is_one(datum, gen_pos, embed_indices):
    if not embed_indices:
        return True
    u = datum.unit_gens[gen_pos]
    r = len(embed_indices)
    factored = None
    bits = 96
    while True:
        box = None
        for i in embed_indices:
            b = u.embed(i, bits)
            box = b if box is None else box * b
        if not (
            box.re.contains_fraction(Fraction(1))
            and box.im.contains_fraction(Fraction(0))
        ):
            return False
        if factored is None:
            factored = _resolvent_factored(datum, gen_pos, r)
            if factored[0] == 0:
                return False  # 1 is not a root of the exact resolvent
        _, h = factored
        val = _poly_on_box(h, box, bits)
        if not (
            val.re.contains_fraction(Fraction(0))
            and val.im.contains_fraction(Fraction(0))
        ):
            return True  # the box holds a root of (x-1)^k and avoids all of h's
        if bits >= PRECISION_CAP:
            raise PrecisionExhausted(
                "product-equals-one undecided", cap_bits=bits
            )
        bits = min(2 * bits, PRECISION_CAP)


def _subset_trivial(datum, embed_indices):
    """Does the product of these embeddings equal 1 for every generator?"""
    key = frozenset(embed_indices)
    cached = datum._subset_cache.get(key)
    if cached is not None:
        return cached
    idxs = tuple(sorted(key))
    verdict = all(
        _gen_product_is_one(datum, g, idxs) for g in range(len(datum.unit_gens))
    )
    datum._subset_cache[key] = verdict
    return verdict


def character_is_trivial(datum, spec):
    """Is sigma_I(u) times conj(sigma_{s+j}(u) : j in J) equal to 1 for
    every generator u?  Exact in both directions.

    The conjugate of embedding s+j is embedding s+t+j, so the whole
    character is one product of distinct embeddings and the resolvent
    certificate applies directly.
    """
    if not isinstance(spec, CharacterSpec):
        raise ValueError("spec must be a CharacterSpec")
    s, t = datum.s, datum.t
    if spec.I and spec.I[-1] > s + t:
        raise ValueError(f"I must lie inside 1..{s + t}")
    if spec.J and spec.J[-1] > t:
        raise ValueError(f"J must lie inside 1..{t}")
    indices = tuple(spec.I) + tuple(s + t + j for j in spec.J)
    return _subset_trivial(datum, indices)


# ---------------------------------------------------------------------------
# counts, diamond, Betti
# ---------------------------------------------------------------------------


def n_triv(datum, p, j):
    """Number of trivial characters with |I| = p, |J| = j (0 off range)."""
    s, t = datum.s, datum.t
    if p < 0 or p > s + t or j < 0 or j > t:
        return 0
    key = (p, j)
    cached = datum._ntriv_cache.get(key)
    if cached is not None:
        return cached
    count = 0
    for I in itertools.combinations(range(1, s + t + 1), p):
        for J in itertools.combinations(range(1, t + 1), j):
            if character_is_trivial(datum, CharacterSpec(I, J)):
                count += 1
    datum._ntriv_cache[key] = count
    return count


def trivial_characters(datum):
    """Every trivial (I, J), in lexicographic order, for auditing."""
    s, t = datum.s, datum.t
    out = []
    for p in range(s + t + 1):
        for I in itertools.combinations(range(1, s + t + 1), p):
            for j in range(t + 1):
                for J in itertools.combinations(range(1, t + 1), j):
                    spec = CharacterSpec(I, J)
                    if character_is_trivial(datum, spec):
                        out.append(spec)
    return sorted(out, key=lambda c: c.key())


def hodge_diamond(datum):
    """The (s+t+1) x (s+t+1) matrix of h^{p,q}.

    h^{p,q} is the convolution sum of C(s, i) against the trivial counts
    n_triv(p, j) over i + j = q.
    """
    s, t = datum.s, datum.t
    size = s + t + 1
    h = [[0] * size for _ in range(size)]
    for p in range(size):
        for q in range(size):
            total = 0
            for j in range(0, min(q, t) + 1):
                i = q - j
                if i > s:
                    continue
                total += math.comb(s, i) * n_triv(datum, p, j)
            h[p][q] = total
    return h


def _full_trivial_count(datum, p):
    """Subsets of all s+2t embeddings, size p, product 1 on every gen."""
    cached = datum._full_count_cache.get(p)
    if cached is not None:
        return cached
    d = datum.field.n_embeddings
    count = 0
    for S in itertools.combinations(range(1, d + 1), p):
        if _subset_trivial(datum, S):
            count += 1
    datum._full_count_cache[p] = count
    return count


def betti(datum):
    """b_0 .. b_{2(s+t)}: convolution of C(s, q) with full-subset counts."""
    s, t = datum.s, datum.t
    out = []
    for l in range(2 * (s + t) + 1):
        total = 0
        for q in range(0, min(l, s) + 1):
            p = l - q
            if p > s + 2 * t:
                continue
            total += math.comb(s, q) * _full_trivial_count(datum, p)
        out.append(total)
    return out


def check_condition_C(datum):
    """True iff the only trivial characters are (emptyset, emptyset) and
    ({1..s+t}, {1..t})."""
    s, t = datum.s, datum.t
    expected = {
        CharacterSpec((), ()),
        CharacterSpec(tuple(range(1, s + t + 1)), tuple(range(1, t + 1))),
    }
    return set(trivial_characters(datum)) == expected


def verify_hodge_decomposition(datum):
    """Per total degree l, compare sum of h^{p,q} over p+q = l with b_l."""
    h = hodge_diamond(datum)
    b = betti(datum)
    s, t = datum.s, datum.t
    size = s + t + 1
    rows = []
    ok = True
    for l in range(2 * (s + t) + 1):
        h_sum = sum(
            h[p][l - p] for p in range(size) if 0 <= l - p < size
        )
        match = h_sum == b[l]
        ok = ok and match
        rows.append({"l": l, "h_sum": h_sum, "b": b[l], "match": match})
    return {"ok": ok, "rows": rows}


# ---------------------------------------------------------------------------
# simple type and the assembled report
# ---------------------------------------------------------------------------


def _charpoly_is_irreducible(u):
    import sympy

    cp = u.charpoly()
    x = sympy.Symbol("x")
    poly = sympy.Poly([sympy.Rational(c) for c in reversed(cp)], x)
    return poly.is_irreducible


def simple_type_probe(datum):
    """One-sided primitivity certificate.

    If some product of generators has minimal polynomial of full degree
    s+2t, no proper intermediate field can contain the unit group, and
    the datum is certifiably of simple type; the report then checks the
    forced diamond entries h^{2,0} = h^{1,1} = 0 and h^{0,2} = C(s, 2).
    Failure to find such a product proves nothing, and the verdict says
    so rather than guessing.
    """
    gens = datum.unit_gens
    candidates = list(gens)
    for a, b in itertools.combinations(range(len(gens)), 2):
        candidates.append(gens[a] * gens[b])
    if len(gens) > 2:
        prod = gens[0]
        for u in gens[1:]:
            prod = prod * u
        candidates.append(prod)
    witness = None
    for u in candidates:
        if _charpoly_is_irreducible(u):
            witness = u
            break
    if witness is None:
        return {"verdict": "undetermined", "witness": None, "consequences": None}
    h = hodge_diamond(datum)
    expected = math.comb(datum.s, 2)
    consequences = {
        "h_2_0": h[2][0],
        "h_1_1": h[1][1],
        "h_0_2": h[0][2],
        "expected_h_0_2": expected,
        "consistent": h[2][0] == 0 and h[1][1] == 0 and h[0][2] == expected,
    }
    return {
        "verdict": "certified_simple",
        "witness": [str(c) for c in witness.coords],
        "consequences": consequences,
    }


class HodgeReport:
    """Assembled invariants of one datum, JSON-ready via to_dict."""

    __slots__ = (
        "h",
        "b",
        "decomposition_ok",
        "condition_C",
        "trivial_pairs",
        "notes",
    )

    def __init__(self, h, b, decomposition_ok, condition_C, trivial_pairs, notes):
        self.h = h
        self.b = b
        self.decomposition_ok = decomposition_ok
        self.condition_C = condition_C
        self.trivial_pairs = trivial_pairs
        self.notes = notes

    def to_dict(self):
        return {
            "h": [list(row) for row in self.h],
            "b": list(self.b),
            "decomposition_ok": self.decomposition_ok,
            "condition_C": self.condition_C,
            "trivial_characters": [
                {"I": list(c.I), "J": list(c.J)} for c in self.trivial_pairs
            ],
            "notes": list(self.notes),
        }

    def __repr__(self):
        return (
            f"HodgeReport(b={self.b}, decomposition_ok={self.decomposition_ok}, "
            f"condition_C={self.condition_C})"
        )


def hodge_report(datum):
    """Diamond, Betti sequence, decomposition check, condition (C), audit
    trail, plus notes on any symmetry the data fails to satisfy.

    For admissible data the notes stay empty; synthetic data can break
    the h^{0,1} = s identity or the complement symmetry of trivial
    counts, and those show up here instead of crashing anything.
    """
    s, t = datum.s, datum.t
    h = hodge_diamond(datum)
    b = betti(datum)
    decomposition = verify_hodge_decomposition(datum)
    cond = check_condition_C(datum)
    notes = []
    if not datum.validated:
        notes.append("datum was constructed with validate=False")
    if h[0][1] != s:
        notes.append(f"h[0][1] = {h[0][1]} differs from s = {s}")
    for p in range(s + t + 1):
        for j in range(t + 1):
            left = n_triv(datum, p, j)
            right = n_triv(datum, s + t - p, t - j)
            if left != right:
                notes.append(
                    f"complement symmetry fails: n_triv({p},{j}) = {left} "
                    f"but n_triv({s + t - p},{t - j}) = {right}"
                )
    if b != b[::-1]:
        notes.append("Betti sequence is not palindromic")
    if sum((-1) ** l * bl for l, bl in enumerate(b)) != 0:
        notes.append("Euler characteristic is nonzero")
    return HodgeReport(
        h=h,
        b=b,
        decomposition_ok=decomposition["ok"],
        condition_C=cond,
        trivial_pairs=trivial_characters(datum),
        notes=notes,
    )
