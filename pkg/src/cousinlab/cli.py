"""Command line driver: eight named jobs over JSON documents.

Every job reads one input document (schema "cousinlab/1", exact numbers
as strings, floats rejected), computes, and writes one output artifact.
Parameters live in the input document rather than in flags: results are
cached by the content hash of (input bytes, command, precision), and a
flag that bypassed the hash could silently change what a cache hit
returns.  ``--precision-bits`` is the one knob that stays a flag because
it is part of the key.

Exit codes follow the error hierarchy: 2 for malformed input, 3 for a
violated precondition, 4 for an undecided comparison at the precision
cap, 5 for a blown resource limit.  Nothing is written on failure; the
output file appears only after the whole artifact is rendered.

Caching is off unless COUSINLAB_CACHE_DIR is set.  Entries store the
final rendered bytes per (key, format), so a hit is byte-identical with
the run that produced it.  ``--seed`` and ``--threads`` are validated
and otherwise inert: every computation here is deterministic and
single-threaded, and the flags exist so test harnesses can pass them
uniformly.
"""

import csv
import hashlib
import io
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

import click

from ._schema import (
    SCHEMA_NAME,
    decode_int,
    decode_period_matrix,
    decode_rational,
)
from .cocycle_probe import find_witnesses, radius_report
from .dispersion import (
    DispersionQuery,
    dispersion_scan,
    liouville_certificate,
    tower_alpha_check,
)
from .errors import CousinlabError, SchemaError
from .exact_numerics import DEFAULT_PRECISION, PRECISION_CAP
from .fourier_dolbeault import (
    FourierPQForm,
    cohomology_dims,
    dbar,
    harmonic_part,
    homotopy_eta,
)
from .number_field import NumberField
from .ot_invariants import OTDatum, hodge_report
from .period_lattice import is_cousin

COMMANDS = (
    "cousin-check",
    "dispersion-scan",
    "liouville-cert",
    "tower-check",
    "dolbeault-dims",
    "dolbeault-solve",
    "ot-hodge",
    "cocycle-probe",
)

FORMATS = ("json", "csv", "table")

# commands whose output has a natural two-column plot reading
_CSV_COMMANDS = frozenset(
    {"dispersion-scan", "dolbeault-dims", "ot-hodge", "cocycle-probe"}
)


class JobSpec:
    """One validated job: what to run, on what, at which precision.

    Construction checks field types and ranges only; paths are validated
    by ``run`` before any computation starts.
    """

    __slots__ = (
        "command",
        "input_path",
        "output_path",
        "precision_bits",
        "format",
        "seed",
        "threads",
    )

    def __init__(
        self,
        command,
        input_path,
        output_path,
        precision_bits=DEFAULT_PRECISION,
        format="json",
        seed=0,
        threads=1,
    ):
        if command not in COMMANDS:
            raise SchemaError(
                f"unknown command {command!r}; expected one of {', '.join(COMMANDS)}"
            )
        if not isinstance(input_path, (str, Path)) or not str(input_path):
            raise SchemaError("input_path must be a nonempty path")
        if not isinstance(output_path, (str, Path)) or not str(output_path):
            raise SchemaError("output_path must be a nonempty path")
        if (
            isinstance(precision_bits, bool)
            or not isinstance(precision_bits, int)
            or not 64 <= precision_bits <= PRECISION_CAP
        ):
            raise SchemaError(
                f"precision_bits must be an integer in [64, {PRECISION_CAP}]"
            )
        if format not in FORMATS:
            raise SchemaError(
                f"unknown format {format!r}; expected one of {', '.join(FORMATS)}"
            )
        if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
            raise SchemaError("seed must be a nonnegative integer")
        if isinstance(threads, bool) or not isinstance(threads, int) or threads < 1:
            raise SchemaError("threads must be a positive integer")
        self.command = command
        self.input_path = str(input_path)
        self.output_path = str(output_path)
        self.precision_bits = precision_bits
        self.format = format
        self.seed = seed
        self.threads = threads

    def __repr__(self):
        return (
            f"JobSpec({self.command!r}, {self.input_path!r} -> "
            f"{self.output_path!r}, bits={self.precision_bits}, "
            f"format={self.format!r})"
        )


# ---------------------------------------------------------------------------
# document plumbing
# ---------------------------------------------------------------------------


def _validate_job(spec):
    if spec.format == "csv" and spec.command not in _CSV_COMMANDS:
        raise SchemaError(
            f"{spec.command} has no two-column rendering; use format json or table"
        )
    inp = Path(spec.input_path)
    if not inp.is_file():
        raise SchemaError(f"input file does not exist: {spec.input_path}")
    parent = Path(spec.output_path).parent
    if not parent.is_dir():
        raise SchemaError(f"output directory does not exist: {parent}")


def _parse_document(payload):
    try:
        doc = json.loads(payload.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SchemaError(f"input is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise SchemaError("input document must be a JSON object")
    declared = doc.get("schema")
    if declared != SCHEMA_NAME:
        raise SchemaError(
            f"unsupported schema {declared!r}; expected {SCHEMA_NAME!r}"
        )
    return doc


def _check_keys(doc, required, optional, where="input"):
    allowed = set(required) | set(optional) | {"schema"}
    extra = set(doc) - allowed
    if extra:
        raise SchemaError(f"{where}: unknown keys {sorted(extra)}")
    missing = set(required) - set(doc)
    if missing:
        raise SchemaError(f"{where}: missing keys {sorted(missing)}")


def _decode_bool(doc, key, default):
    if key not in doc:
        return default
    v = doc[key]
    if not isinstance(v, bool):
        raise SchemaError(f"{key}: expected true or false")
    return v


def _decode_rational_list(obj, where):
    if not isinstance(obj, list):
        raise SchemaError(f"{where}: expected a list of exact rationals")
    return [decode_rational(x, f"{where}[{i}]") for i, x in enumerate(obj)]


def _envelope(spec):
    return {
        "schema": SCHEMA_NAME,
        "command": spec.command,
        "precision_bits": spec.precision_bits,
    }


# ---------------------------------------------------------------------------
# the eight jobs
# ---------------------------------------------------------------------------


def _job_cousin_check(doc, spec):
    _check_keys(doc, ("period",), ())
    P = decode_period_matrix(doc["period"])
    result = _envelope(spec)
    result.update(is_cousin(P).to_dict())
    return result


def _job_dispersion_scan(doc, spec):
    _check_keys(
        doc,
        ("period", "sigma_budget"),
        ("a_grid", "skip_cousin_check", "table_cap"),
    )
    P = decode_period_matrix(doc["period"])
    budget = decode_int(doc["sigma_budget"], "sigma_budget")
    a_grid = _decode_rational_list(doc.get("a_grid", []), "a_grid")
    kwargs = {}
    if "table_cap" in doc:
        kwargs["table_cap"] = decode_int(doc["table_cap"], "table_cap")
    query = DispersionQuery(
        P,
        budget,
        a_grid=tuple(a_grid),
        precision_bits=spec.precision_bits,
        skip_cousin_check=_decode_bool(doc, "skip_cousin_check", False),
        **kwargs,
    )
    result = _envelope(spec)
    result.update(dispersion_scan(query).to_dict())
    return result


def _job_liouville_cert(doc, spec):
    _check_keys(doc, ("period",), ("bound_bits", "verify_budget"))
    P = decode_period_matrix(doc["period"])
    bound_bits = decode_int(doc.get("bound_bits", 128), "bound_bits")
    cert = liouville_certificate(P, bound_bits=bound_bits)
    result = _envelope(spec)
    result["certificate"] = cert.to_dict()
    if "verify_budget" in doc:
        vs = dict(cert.verify_scan(decode_int(doc["verify_budget"], "verify_budget")))
        for key in ("violator", "tightest_sigma"):
            if vs.get(key) is not None:
                vs[key] = list(vs[key])
        result["verify"] = vs
    return result


def _job_tower_check(doc, spec):
    _check_keys(doc, (), ("k_max", "q_max", "base", "q_list", "sample_count"))
    kwargs = {"precision_bits": spec.precision_bits}
    for key in ("k_max", "q_max", "base", "sample_count"):
        if key in doc:
            kwargs[key] = decode_int(doc[key], key)
    if "q_list" in doc:
        qs = doc["q_list"]
        if not isinstance(qs, list):
            raise SchemaError("q_list: expected a list of integers")
        kwargs["q_list"] = [decode_int(q, f"q_list[{i}]") for i, q in enumerate(qs)]
    result = _envelope(spec)
    result.update(tower_alpha_check(**kwargs).to_dict())
    return result


def _job_dolbeault_dims(doc, spec):
    _check_keys(doc, ("period", "p", "box"), ("q",))
    P = decode_period_matrix(doc["period"])
    p = decode_int(doc["p"], "p")
    box = decode_int(doc["box"], "box")
    if box < 0:
        raise SchemaError("box must be nonnegative")
    if doc.get("q") is None:
        qs = range(P.m + 1)
    else:
        qs = [decode_int(doc["q"], "q")]
    dims = [
        {"q": q, "dimension": cohomology_dims(P, p, q, box)} for q in qs
    ]
    result = _envelope(spec)
    result.update({"p": p, "truncation_box": box, "dims": dims})
    if len(dims) == 1:
        result["dimension"] = dims[0]["dimension"]
    return result


def _job_dolbeault_solve(doc, spec):
    _check_keys(doc, ("period", "form"), ("conjugate_lambda",))
    P = decode_period_matrix(doc["period"])
    f = FourierPQForm.from_json_obj(doc["form"], field=P.field)
    conj = _decode_bool(doc, "conjugate_lambda", True)
    eta = homotopy_eta(f, P, conjugate_lambda=conj)
    harmonic = harmonic_part(f)
    residual_zero = dbar(eta, P) == (f - harmonic)
    result = _envelope(spec)
    result.update(
        {
            "conjugate_lambda": conj,
            "eta": eta.to_json_obj(),
            "harmonic": harmonic.to_json_obj(),
            "residual_zero": bool(residual_zero),
            "input_terms": len(f.coeffs),
            "eta_terms": len(eta.coeffs),
        }
    )
    return result


def _decode_ot_elements(field, obj, where):
    if not isinstance(obj, list) or not obj:
        raise SchemaError(f"{where}: expected a nonempty list of coordinate lists")
    out = []
    for i, coords in enumerate(obj):
        if not isinstance(coords, list) or len(coords) > field.degree:
            raise SchemaError(
                f"{where}[{i}]: expected at most {field.degree} rational coordinates"
            )
        out.append(
            field.element(
                [
                    decode_rational(c, f"{where}[{i}][{j}]")
                    for j, c in enumerate(coords)
                ]
            )
        )
    return out


def _job_ot_hodge(doc, spec):
    _check_keys(doc, ("minpoly", "units"), ("lattice", "validate"))
    raw = doc["minpoly"]
    if not isinstance(raw, list) or not raw:
        raise SchemaError("minpoly: expected a nonempty list of integers")
    field = NumberField(
        [decode_int(c, f"minpoly[{i}]") for i, c in enumerate(raw)]
    )
    units = _decode_ot_elements(field, doc["units"], "units")
    lattice = None
    if doc.get("lattice") is not None:
        lattice = _decode_ot_elements(field, doc["lattice"], "lattice")
    datum = OTDatum(
        field, units, lattice=lattice, validate=_decode_bool(doc, "validate", True)
    )
    report = hodge_report(datum)
    result = _envelope(spec)
    result.update(report.to_dict())
    result["signature"] = [datum.s, datum.t]
    result["validated"] = datum.validated
    result["h01"] = report.h[0][1]
    return result


def _job_cocycle_probe(doc, spec):
    if "synthetic" in doc:
        _check_keys(doc, ("synthetic", "a", "xs"), ())
        syn = doc["synthetic"]
        if not isinstance(syn, dict) or set(syn) != {"depths", "etas"}:
            raise SchemaError("synthetic: expected {depths, etas}")
        depths_raw = syn["depths"]
        if not isinstance(depths_raw, list):
            raise SchemaError("synthetic.depths: expected a list of integers")
        depths = [
            decode_int(d, f"synthetic.depths[{i}]") for i, d in enumerate(depths_raw)
        ]
        etas = _decode_rational_list(syn["etas"], "synthetic.etas")
        if len(depths) != len(etas):
            raise SchemaError("synthetic: depths and etas must have equal length")
        a = decode_rational(doc["a"], "a")
        xs = _decode_rational_list(doc["xs"], "xs")
        report = radius_report(xs, list(zip(depths, etas)), a=a)
        result = _envelope(spec)
        result["mode"] = "synthetic"
        result["report"] = report.to_dict()
        return result

    _check_keys(
        doc,
        ("period", "a", "k_max", "sigma_budget"),
        ("use_certificate", "xs"),
    )
    P = decode_period_matrix(doc["period"])
    a = decode_rational(doc["a"], "a")
    k_max = decode_int(doc["k_max"], "k_max")
    budget = decode_int(doc["sigma_budget"], "sigma_budget")
    cert = None
    if _decode_bool(doc, "use_certificate", False):
        cert = liouville_certificate(P)
    seq = find_witnesses(P, a, k_max, budget, certificate=cert)
    etas = []
    for item in seq:
        iv = seq.eta(item)
        etas.append(
            {
                "sigma_l1": item.sigma_l1,
                "lo": str(iv.lo_fraction()),
                "hi": str(iv.hi_fraction()),
                "value": float(iv),
            }
        )
    result = _envelope(spec)
    result["mode"] = "scan"
    result["witnesses"] = seq.to_dict()
    result["eta"] = etas
    if cert is not None:
        result["certificate"] = cert.to_dict()
    if "xs" in doc:
        xs = _decode_rational_list(doc["xs"], "xs")
        result["report"] = radius_report(xs, seq).to_dict()
    return result


_HANDLERS = {
    "cousin-check": _job_cousin_check,
    "dispersion-scan": _job_dispersion_scan,
    "liouville-cert": _job_liouville_cert,
    "tower-check": _job_tower_check,
    "dolbeault-dims": _job_dolbeault_dims,
    "dolbeault-solve": _job_dolbeault_solve,
    "ot-hodge": _job_ot_hodge,
    "cocycle-probe": _job_cocycle_probe,
}


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------


def _render_json(result):
    return (json.dumps(result, sort_keys=True, indent=2) + "\n").encode("utf-8")


def _interval_mid(entry):
    return float((Fraction(entry["lo"]) + Fraction(entry["hi"])) / 2)


def _csv_rows(result, command):
    if command == "dispersion-scan":
        rows = [("sigma_l1", "d")]
        for row in result["table"]:
            rows.append((sum(abs(x) for x in row["sigma"]), row["d"]))
        return rows
    if command == "dolbeault-dims":
        return [("q", "dimension")] + [
            (d["q"], d["dimension"]) for d in result["dims"]
        ]
    if command == "cocycle-probe":
        if "report" in result:
            rep = result["report"]
            return [("x", "radius_mid")] + [
                (x, _interval_mid(r)) for x, r in zip(rep["xs"], rep["radii"])
            ]
        return [("sigma_l1", "eta")] + [
            (e["sigma_l1"], e["value"]) for e in result["eta"]
        ]
    # _validate_job already screened the command; this is ot-hodge
    rows = [("I", "J")]
    for c in result["trivial_characters"]:
        rows.append(
            (
                " ".join(str(i) for i in c["I"]),
                " ".join(str(j) for j in c["J"]),
            )
        )
    return rows


def _render_csv(result, command):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in _csv_rows(result, command):
        writer.writerow(row)
    return buf.getvalue().encode("utf-8")


def _diamond_lines(h):
    n = len(h) - 1
    cell = max(len(str(v)) for row in h for v in row)
    rows = []
    for level in range(2 * n + 1):
        entries = [
            str(h[p][level - p]).center(cell)
            for p in range(max(0, level - n), min(n, level) + 1)
        ]
        rows.append("  ".join(entries))
    width = max(len(r) for r in rows)
    return [r.center(width).rstrip() for r in rows]


def _table_scalars(result):
    lines = []
    for key in sorted(result):
        value = result[key]
        if isinstance(value, (str, int, float, bool)) or value is None:
            lines.append(f"{key} = {value}")
    return lines


def _render_table(result, command):
    lines = [f"# {command}"]
    lines.extend(_table_scalars(result))
    if command == "ot-hodge":
        lines.append("")
        lines.append("hodge diamond")
        lines.extend(_diamond_lines(result["h"]))
        lines.append("")
        lines.append("betti " + " ".join(str(b) for b in result["b"]))
        lines.append("")
        lines.append("trivial characters (I ; J)")
        for c in result["trivial_characters"]:
            left = " ".join(str(i) for i in c["I"]) or "-"
            right = " ".join(str(j) for j in c["J"]) or "-"
            lines.append(f"  {left} ; {right}")
        for note in result["notes"]:
            lines.append(f"note: {note}")
    elif command == "cousin-check":
        if "sigma" in result:
            lines.append(f"sigma = {result['sigma']}")
            lines.append(f"tau = {result['tau']}")
    elif command == "dispersion-scan":
        lines.append("")
        lines.append("sigma | d | tau")
        for row in result["table"]:
            lines.append(f"{row['sigma']} | {row['d']!r} | {row['tau']}")
    elif command == "dolbeault-dims":
        lines.append("")
        lines.append("q | dimension")
        for d in result["dims"]:
            lines.append(f"{d['q']} | {d['dimension']}")
    elif command == "liouville-cert":
        cert = result["certificate"]
        lines.append("")
        for key in ("C", "A", "degree", "denominator"):
            lines.append(f"{key} = {cert[key]}")
        if "verify" in result:
            lines.append(f"verify_ok = {result['verify']['ok']}")
    elif command == "tower-check":
        lines.append("")
        lines.append(f"failures = {result['failures']}")
        inf = result["inf_at_first_level"]
        lines.append(f"inf at first level: q = {inf['q']}, value = {inf['value']!r}")
    elif command == "cocycle-probe":
        if "witnesses" in result:
            lines.append("")
            lines.append("k | sigma | eta")
            for item, e in zip(result["witnesses"]["items"], result["eta"]):
                lines.append(f"{item['k']} | {item['sigma']} | {e['value']!r}")
        if "report" in result:
            rep = result["report"]
            lines.append("")
            lines.append("x | radius_lo | radius_hi")
            for x, r in zip(rep["xs"], rep["radii"]):
                lo = float(Fraction(r["lo"]))
                hi = float(Fraction(r["hi"]))
                lines.append(f"{x} | {lo!r} | {hi!r}")
            lines.append(f"separation_ok = {rep['separation_ok']}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def _render(result, spec):
    if spec.format == "json":
        return _render_json(result)
    if spec.format == "csv":
        return _render_csv(result, spec.command)
    return _render_table(result, spec.command)


# ---------------------------------------------------------------------------
# cache
# ---------------------------------------------------------------------------


def _cache_key(spec, payload):
    digest = hashlib.sha256()
    digest.update(payload)
    digest.update(b"\x00")
    digest.update(spec.command.encode("utf-8"))
    digest.update(b"\x00")
    digest.update(str(spec.precision_bits).encode("utf-8"))
    return digest.hexdigest()


def _cache_path(spec, payload):
    root = os.environ.get("COUSINLAB_CACHE_DIR")
    if not root:
        return None
    return Path(root) / f"{_cache_key(spec, payload)}.{spec.format}"


def _cache_lookup(spec, payload):
    path = _cache_path(spec, payload)
    if path is not None and path.is_file():
        return path.read_bytes()
    return None


def _cache_store(spec, payload, rendered):
    path = _cache_path(spec, payload)
    if path is None:
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(rendered)


# ---------------------------------------------------------------------------
# entry points
# ---------------------------------------------------------------------------


def run(spec):
    """Execute one job; returns the process exit code.

    Package errors are reported as one line on stderr plus their exit
    code; anything else is a bug and propagates.  On success the output
    file holds the complete artifact and the code is 0.
    """
    if not isinstance(spec, JobSpec):
        raise TypeError("run takes a JobSpec")
    try:
        _validate_job(spec)
        payload = Path(spec.input_path).read_bytes()
        rendered = _cache_lookup(spec, payload)
        if rendered is None:
            doc = _parse_document(payload)
            result = _HANDLERS[spec.command](doc, spec)
            rendered = _render(result, spec)
            _cache_store(spec, payload, rendered)
        Path(spec.output_path).write_bytes(rendered)
        return 0
    except CousinlabError as exc:
        print(f"{spec.command}: {exc}", file=sys.stderr)
        return exc.exit_code


_HELP = {
    "cousin-check": "Decide the toroidal criterion for a period matrix.",
    "dispersion-scan": "Measure d(sigma) over a budget and classify the decay.",
    "liouville-cert": "Issue (and optionally verify) a Liouville lower bound.",
    "tower-check": "Check the weak dispersion bounds for the tower number.",
    "dolbeault-dims": "Truncated dbar cohomology dimensions over a character box.",
    "dolbeault-solve": "Solve dbar(eta) = f minus its harmonic part, exactly.",
    "ot-hodge": "Hodge diamond and Betti numbers from number-field data.",
    "cocycle-probe": "Scan witness levels or size up a synthetic witness sequence.",
}


@click.group()
def main():
    """Exact toolkit jobs; each subcommand reads one JSON document."""


def _register(name):
    @main.command(name=name, help=_HELP[name])
    @click.option("--input", "input_path", required=True, help="Input JSON document.")
    @click.option("--output", "output_path", required=True, help="Output artifact path.")
    @click.option(
        "--format",
        "fmt",
        default="json",
        show_default=True,
        help="Output rendering: json, csv, or table.",
    )
    @click.option(
        "--precision-bits",
        default=DEFAULT_PRECISION,
        show_default=True,
        type=int,
        help="Working precision; part of the cache key.",
    )
    @click.option(
        "--seed",
        default=0,
        show_default=True,
        type=int,
        help="Accepted for test tooling; computations are deterministic.",
    )
    @click.option(
        "--threads",
        default=1,
        show_default=True,
        type=int,
        help="Worker pool cap; the computations here are single-threaded.",
    )
    def _cmd(input_path, output_path, fmt, precision_bits, seed, threads):
        try:
            spec = JobSpec(
                name,
                input_path,
                output_path,
                precision_bits=precision_bits,
                format=fmt,
                seed=seed,
                threads=threads,
            )
        except CousinlabError as exc:
            print(f"{name}: {exc}", file=sys.stderr)
            sys.exit(exc.exit_code)
        sys.exit(run(spec))

    return _cmd


for _name in COMMANDS:
    _register(_name)


if __name__ == "__main__":
    main()
