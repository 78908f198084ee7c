"""Exact-value JSON conventions shared by serializers and the CLI.

Rationals travel as strings "p/q" (or "p"), never as JSON numbers, so
nothing silently rounds: a float where an exact value belongs is a schema
error, not a warning.  Number-field elements travel as {"coords": [...]}
in the power basis of the declared field, and the field itself as
{"minpoly": [...]} plus an embedding selector, either the 1-based
"embedding_index" into the ascending real roots or a "root_in" window of
rational endpoints isolating the intended root.
"""

from fractions import Fraction

from .errors import SchemaError
from .number_field import FieldElement, NumberField
from .period_lattice import PeriodMatrix

SCHEMA_NAME = "cousinlab/1"


def encode_scalar(x):
    if isinstance(x, FieldElement):
        if x.is_rational():
            return encode_scalar(x.as_rational())
        return {"coords": [encode_scalar(c) for c in x.coords]}
    q = Fraction(x)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def decode_rational(obj, where="value"):
    """Exact rational from a JSON string or int; floats are refused."""
    if isinstance(obj, bool):
        raise SchemaError(f"{where}: expected an exact rational, got a boolean")
    if isinstance(obj, int):
        return Fraction(obj)
    if isinstance(obj, float):
        raise SchemaError(
            f"{where}: floats are not exact; write the value as a string 'p/q'"
        )
    if isinstance(obj, str):
        try:
            return Fraction(obj.strip())
        except (ValueError, ZeroDivisionError):
            raise SchemaError(f"{where}: cannot parse {obj!r} as p/q") from None
    raise SchemaError(f"{where}: expected 'p/q' string, got {type(obj).__name__}")


def decode_scalar(obj, field=None, where="value"):
    """Rational or field element; coords form requires a declared field."""
    if isinstance(obj, dict):
        if set(obj) != {"coords"}:
            raise SchemaError(f"{where}: field elements carry exactly one key, coords")
        if field is None:
            raise SchemaError(f"{where}: coords given but no number field declared")
        if not isinstance(field, NumberField):
            raise SchemaError(f"{where}: field must be a NumberField")
        coords = obj["coords"]
        if not isinstance(coords, list) or len(coords) > field.degree:
            raise SchemaError(
                f"{where}: coords must be a list of at most {field.degree} rationals"
            )
        return field.element(
            [decode_rational(c, f"{where}.coords[{i}]") for i, c in enumerate(coords)]
        )
    return decode_rational(obj, where)


def decode_int(obj, where="value"):
    if isinstance(obj, bool) or not isinstance(obj, int):
        raise SchemaError(f"{where}: expected an integer")
    return obj


def decode_int_vector(obj, length, where="value"):
    if not isinstance(obj, list) or len(obj) != length:
        raise SchemaError(f"{where}: expected a list of {length} integers")
    return tuple(decode_int(x, f"{where}[{i}]") for i, x in enumerate(obj))


def decode_field(obj, where="field"):
    """(NumberField, embedding index or None) from a field descriptor.

    The descriptor carries "minpoly" (ascending integer coefficients) and
    at most one embedding selector.  "root_in" endpoints must be exact
    rationals; the window has to isolate exactly one real root, decided
    by certified comparisons, and its 1-based ascending position becomes
    the index.  Reducibility and degree are the field's own contract and
    surface as precondition errors, not schema errors.
    """
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: expected an object")
    extra = set(obj) - {"minpoly", "embedding_index", "root_in"}
    if extra:
        raise SchemaError(f"{where}: unknown keys {sorted(extra)}")
    if "minpoly" not in obj:
        raise SchemaError(f"{where}: missing minpoly")
    raw = obj["minpoly"]
    if not isinstance(raw, list) or not raw:
        raise SchemaError(f"{where}.minpoly: expected a nonempty list of integers")
    coeffs = [decode_int(c, f"{where}.minpoly[{i}]") for i, c in enumerate(raw)]
    field = NumberField(coeffs)
    if "embedding_index" in obj and "root_in" in obj:
        raise SchemaError(f"{where}: give embedding_index or root_in, not both")
    if "embedding_index" in obj:
        k = decode_int(obj["embedding_index"], f"{where}.embedding_index")
        if not 1 <= k <= field.s:
            raise SchemaError(
                f"{where}.embedding_index: field has {field.s} real "
                f"embeddings, got {k}"
            )
        return field, k
    if "root_in" in obj:
        win = obj["root_in"]
        if not isinstance(win, list) or len(win) != 2:
            raise SchemaError(f"{where}.root_in: expected [lo, hi]")
        lo = decode_rational(win[0], f"{where}.root_in[0]")
        hi = decode_rational(win[1], f"{where}.root_in[1]")
        if lo >= hi:
            raise SchemaError(f"{where}.root_in: need lo < hi")
        inside = [
            i + 1
            for i, root in enumerate(field.real_roots)
            if root.compare_fraction(lo) > 0 and root.compare_fraction(hi) < 0
        ]
        if len(inside) != 1:
            raise SchemaError(
                f"{where}.root_in: window ({lo}, {hi}) contains "
                f"{len(inside)} real roots, need exactly 1"
            )
        return field, inside[0]
    return field, None


def _decode_block(obj, rows, cols, field, where):
    if not isinstance(obj, list) or len(obj) != rows:
        raise SchemaError(f"{where}: expected {rows} rows")
    out = []
    for i, row in enumerate(obj):
        if not isinstance(row, list) or len(row) != cols:
            raise SchemaError(f"{where}[{i}]: expected {cols} entries")
        out.append(
            [decode_scalar(x, field, f"{where}[{i}][{j}]") for j, x in enumerate(row)]
        )
    return out


def decode_period_matrix(obj, where="period"):
    """PeriodMatrix from {"M", "N", "R1", "R2", "field"?}.

    Block shapes follow from the blocks themselves: M fixes m, R1 fixes
    the real-row count.  When any entry uses coords, the descriptor under
    "field" must be present and must name its embedding.
    """
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: expected an object")
    extra = set(obj) - {"M", "N", "R1", "R2", "field"}
    if extra:
        raise SchemaError(f"{where}: unknown keys {sorted(extra)}")
    missing = {"M", "N", "R1", "R2"} - set(obj)
    if missing:
        raise SchemaError(f"{where}: missing blocks {sorted(missing)}")
    field = emb = None
    if "field" in obj:
        field, emb = decode_field(obj["field"], f"{where}.field")
        if emb is None:
            raise SchemaError(
                f"{where}.field: an embedding selector is required "
                f"(embedding_index or root_in)"
            )
    if not isinstance(obj["M"], list) or not obj["M"]:
        raise SchemaError(f"{where}.M: expected a nonempty list of rows")
    m = len(obj["M"])
    if not isinstance(obj["R1"], list):
        raise SchemaError(f"{where}.R1: expected a list of rows")
    k = len(obj["R1"])
    M = _decode_block(obj["M"], m, m, field, f"{where}.M")
    N = _decode_block(obj["N"], m, m, field, f"{where}.N")
    R1 = _decode_block(obj["R1"], k, m, field, f"{where}.R1")
    R2 = _decode_block(obj["R2"], k, m, field, f"{where}.R2")
    return PeriodMatrix(M, N, R1, R2, field=field, embedding_index=emb)


def encode_period_matrix(P):
    out = {
        "M": [[encode_scalar(x) for x in row] for row in P.M],
        "N": [[encode_scalar(x) for x in row] for row in P.N],
        "R1": [[encode_scalar(x) for x in row] for row in P.R1],
        "R2": [[encode_scalar(x) for x in row] for row in P.R2],
    }
    if P.field is not None:
        out["field"] = {
            "minpoly": list(P.field.minpoly),
            "embedding_index": P.embedding_index,
        }
    return out
