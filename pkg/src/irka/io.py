"""Matrix Market files, shift files, JSON run reports and history CSV."""

import csv
import json
import math
import os

import numpy as np

from .driver import IterationRecord
from .errors import DimensionMismatch, ParseError, UnsupportedField
from .lti import LtiSystem
from .shifts import ShiftSet, matching_distance

__all__ = [
    "read_matrix_market",
    "write_matrix_market",
    "load_system",
    "write_system",
    "read_shift_file",
    "finite_or_token",
    "build_report",
    "dump_report",
    "write_history_csv",
    "read_history_csv",
    "resolve_input",
]

_FORMATS = ("coordinate", "array")
_FIELDS = ("real", "integer", "double")
_SYMMETRIES = ("general", "symmetric")


def _parse_float(tok, lineno):
    try:
        return float(tok)
    except ValueError:
        raise ParseError(f"not a number: {tok!r}", lineno) from None


def _parse_int(tok, lineno):
    try:
        return int(tok)
    except ValueError:
        raise ParseError(f"not an integer: {tok!r}", lineno) from None


def read_matrix_market(path):
    """Read a Matrix Market file into a dense float array.

    Supported headers: ``matrix coordinate real general|symmetric`` and
    ``matrix array real general``.  Symmetric coordinate files list one
    triangle; the other is mirrored.
    """
    with open(path, "r", encoding="ascii") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ParseError("empty file", 1)
    head = lines[0].split()
    if len(head) != 5 or head[0].lower() != "%%matrixmarket" or head[1].lower() != "matrix":
        raise ParseError("expected '%%MatrixMarket matrix <format> <field> <symmetry>'", 1)
    fmt, fld, sym = (h.lower() for h in head[2:])
    if fmt not in _FORMATS:
        raise ParseError(f"unknown format {fmt!r}", 1)
    if fld not in _FIELDS:
        raise UnsupportedField(f"field {fld!r} is not supported", 1)
    if sym not in _SYMMETRIES or (fmt == "array" and sym != "general"):
        raise UnsupportedField(f"symmetry {sym!r} is not supported for {fmt} files", 1)

    body = [
        (i + 1, ln.split())
        for i, ln in enumerate(lines[1:], start=1)
        if ln.strip() and not ln.lstrip().startswith("%")
    ]
    if not body:
        raise ParseError("missing size line", len(lines))
    lineno, size = body[0]
    entries = body[1:]

    if fmt == "array":
        if len(size) != 2:
            raise ParseError("array size line needs 'rows cols'", lineno)
        m, n = (_parse_int(t, lineno) for t in size)
        if m < 0 or n < 0:
            raise ParseError("negative dimension", lineno)
        if len(entries) != m * n:
            where = entries[m * n][0] if len(entries) > m * n else len(lines)
            raise ParseError(f"expected {m * n} values, found {len(entries)}", where)
        vals = np.empty(m * n)
        for k, (ln, toks) in enumerate(entries):
            if len(toks) != 1:
                raise ParseError("expected one value per line", ln)
            vals[k] = _parse_float(toks[0], ln)
        return vals.reshape((n, m)).T.copy()

    if len(size) != 3:
        raise ParseError("coordinate size line needs 'rows cols entries'", lineno)
    m, n, nnz = (_parse_int(t, lineno) for t in size)
    if m < 0 or n < 0 or nnz < 0:
        raise ParseError("negative size", lineno)
    if sym == "symmetric" and m != n:
        raise ParseError("symmetric matrix must be square", lineno)
    if len(entries) != nnz:
        where = entries[nnz][0] if len(entries) > nnz else len(lines)
        raise ParseError(f"expected {nnz} entries, found {len(entries)}", where)
    out = np.zeros((m, n))
    for ln, toks in entries:
        if len(toks) != 3:
            raise ParseError("expected 'row col value'", ln)
        i, j = _parse_int(toks[0], ln), _parse_int(toks[1], ln)
        if not (1 <= i <= m and 1 <= j <= n):
            raise ParseError(f"index ({i}, {j}) out of range", ln)
        if sym == "symmetric" and j > i:
            raise ParseError("symmetric files store the lower triangle only", ln)
        v = _parse_float(toks[2], ln)
        out[i - 1, j - 1] += v
        if sym == "symmetric" and i != j:
            out[j - 1, i - 1] += v
    return out


def write_matrix_market(path, M, comment=None):
    """Write a dense real array in ``array real general`` format.

    Values are written with ``repr`` so reading back is bit-exact.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim == 1:
        M = M[:, None]
    m, n = M.shape
    parts = ["%%MatrixMarket matrix array real general\n"]
    if comment:
        parts.extend(f"% {ln}\n" for ln in comment.splitlines())
    parts.append(f"{m} {n}\n")
    parts.extend(f"{float(v)!r}\n" for v in M.T.ravel())
    with open(path, "w", encoding="ascii") as fh:
        fh.write("".join(parts))


def _as_vector(M, name, n):
    if M.ndim == 2 and 1 in M.shape:
        M = M.ravel()
    if M.ndim != 1 or M.shape[0] != n:
        raise DimensionMismatch(f"{name} must be an {n}x1 vector, got shape {M.shape}")
    return M


def load_system(a_path, b_path, c_path):
    """Assemble an :class:`LtiSystem` from three Matrix Market files."""
    A = read_matrix_market(a_path)
    if A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"A must be square, got shape {A.shape}")
    n = A.shape[0]
    b = _as_vector(read_matrix_market(b_path), "b", n)
    c = _as_vector(read_matrix_market(c_path), "c", n)
    return LtiSystem(A, b, c)


def write_system(sys, prefix):
    """Write ``{prefix}_A.mtx``, ``{prefix}_b.mtx``, ``{prefix}_c.mtx``; returns the paths."""
    paths = tuple(f"{prefix}_{name}.mtx" for name in ("A", "b", "c"))
    for path, data in zip(paths, (sys.A, sys.b, sys.c)):
        write_matrix_market(path, data)
    return paths


def read_shift_file(path, r=None, tol=1e-10):
    """Shifts from a JSON array of ``[re, im]`` pairs.

    The set must be closed under conjugation up to ``tol`` relative; it is
    then snapped to an exactly closed :class:`ShiftSet`.
    """
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, exc.lineno) from None
    if not isinstance(data, list) or not all(
        isinstance(p, list) and len(p) == 2 and all(isinstance(x, (int, float)) for x in p)
        for p in data
    ):
        raise ParseError("shift file must be a JSON array of [re, im] pairs")
    vals = np.array([complex(re, im) for re, im in data])
    if vals.size == 0:
        raise ParseError("shift file is empty")
    if r is not None and len(vals) != r:
        raise DimensionMismatch(f"shift file has {len(vals)} shifts, expected r={r}")
    shifts = ShiftSet.from_values(vals, tol)
    scale = max(np.max(np.abs(vals)), np.finfo(float).tiny)
    if matching_distance(shifts, vals) > tol * scale:
        raise ParseError("shifts are not closed under conjugation")
    return shifts


def finite_or_token(x):
    """Floats pass through; ``inf``/``nan`` become explicit string tokens."""
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(x, dict):
        return {k: finite_or_token(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [finite_or_token(v) for v in x]
    if isinstance(x, np.ndarray):
        return finite_or_token(x.tolist())
    return x


def _pairs(z):
    return [[float(np.real(v)), float(np.imag(v))] for v in np.ravel(z)]


def build_report(result, config, inputs, sys):
    """JSON-ready dictionary for a finished run (no timings)."""
    final = result.final
    report = {
        "format": "irka-run-report/1",
        "inputs": dict(inputs),
        "n": int(sys.n),
        "input_stable": bool(sys.is_stable()),
        "config": config.to_dict(),
        "status": str(result.status),
        "status_kind": result.status.kind,
        "cycle_period": int(result.status.period),
        "iterations": len(result.history),
        "initial_shifts": _pairs(result.initial_shifts) if result.initial_shifts is not None else None,
        "history": [rec.to_dict() for rec in result.history],
    }
    if final is not None:
        report.update(
            final_shifts=_pairs(final.sigma),
            final_poles=_pairs(final.mu),
            q=_pairs(final.q),
            c_r=_pairs(final.c_r),
            residues=_pairs(final.residues),
        )
    if result.realified is not None:
        R = result.realified
        report["realified"] = {"A": R.A.tolist(), "b": R.b.tolist(), "c": R.c.tolist()}
    report["certificate"] = result.certificate.to_dict() if result.certificate is not None else None
    return finite_or_token(report)


def dump_report(report, path):
    text = json.dumps(report, indent=1, sort_keys=True, allow_nan=False)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text + "\n")


def write_history_csv(records, path):
    """One row per iteration under the fixed header.

    ``records`` is a list of :class:`IterationRecord` or of report history
    dictionaries.  Floats are written with ``repr`` (round-trip exact).
    """
    fields = IterationRecord.CSV_FIELDS
    with open(path, "w", newline="", encoding="ascii") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(fields)
        for rec in records:
            row = rec.row() if hasattr(rec, "row") else [rec[f] for f in fields]
            w.writerow([_csv_cell(v) for v in row])


def _csv_cell(v):
    v = finite_or_token(v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def read_history_csv(path):
    """Parse a history CSV back into a list of dictionaries of floats/ints."""
    with open(path, newline="", encoding="ascii") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != IterationRecord.CSV_FIELDS:
        raise ParseError("unexpected CSV header", 1)
    out = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(rows[0]):
            raise ParseError("wrong number of columns", lineno)
        rec = {}
        for name, cell in zip(rows[0], row):
            rec[name] = int(cell) if name in ("k", "flipped") else float(cell)
        out.append(rec)
    return out


def resolve_input(path, report_path):
    """Find an input path stored in a report: as given, else next to the report."""
    if os.path.exists(path):
        return path
    alt = os.path.join(os.path.dirname(os.path.abspath(report_path)), path)
    return alt if os.path.exists(alt) else path
