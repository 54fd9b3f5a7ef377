"""Curve, report and matrix file formats.

Curves are written as CSV with a one-line ``# {json}`` preamble followed by
the header ``s,x1,..,xn,y1,..,yn[,t]`` and one row per sample, or as JSON
mirroring the curve fields. Floats are written with ``repr`` (the shortest
string that round-trips a double), so every writer's output reads back
bit-identically.
"""

import csv
import io
import json
from pathlib import Path

import numpy as np

from .curves import HorizontalCurve, PlanarCurve
from .fourier import EqualityCase, IsoperimetricReport


class CurveFormatError(ValueError):
    """Malformed curve file; the message carries the row or field at fault."""


def _fmt(v):
    return repr(float(v))


def _header(n, lifted):
    cols = ["s"] + [f"x{j}" for j in range(1, n + 1)] + [f"y{j}" for j in range(1, n + 1)]
    return cols + ["t"] if lifted else cols


def _split(curve):
    if isinstance(curve, HorizontalCurve):
        return curve.base, np.asarray(curve.t)
    return curve, None


def curve_to_csv(curve, metadata=None):
    """CSV text for a planar or lifted curve."""
    base, t = _split(curve)
    preamble = {"n": base.n, "M": base.M, "closed": base.closed, "metadata": metadata or {}}
    buf = io.StringIO()
    buf.write("# " + json.dumps(preamble) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_header(base.n, t is not None))
    s = base.s
    for k in range(len(base)):
        row = [_fmt(s[k])] + [_fmt(v) for v in base.samples[k]]
        if t is not None:
            row.append(_fmt(t[k]))
        writer.writerow(row)
    return buf.getvalue()


def _parse_preamble(line):
    try:
        meta = json.loads(line[1:].strip())
    except json.JSONDecodeError as exc:
        raise CurveFormatError(f"row 1: metadata comment is not valid JSON ({exc.msg})") from exc
    if not isinstance(meta, dict):
        raise CurveFormatError("row 1: metadata comment must be a JSON object")
    return meta


def curve_from_csv(text):
    """Parse CSV text; returns ``(curve, metadata)``."""
    lines = text.splitlines()
    preamble = {}
    start = 0
    if lines and lines[0].startswith("#"):
        preamble = _parse_preamble(lines[0])
        start = 1
    rows = list(csv.reader(lines[start:]))
    if not rows:
        raise CurveFormatError("missing header row")
    header = [h.strip() for h in rows[0]]
    width = len(header) - 1
    lifted = header[-1] == "t"
    n = (width - 1) // 2 if lifted else width // 2
    if n < 1 or header != _header(n, lifted):
        raise CurveFormatError(
            f"row {start + 1}: header {','.join(header)!r} is not 's,x1,..,xn,y1,..,yn[,t]'"
        )
    data = np.empty((len(rows) - 1, len(header)))
    for i, row in enumerate(rows[1:]):
        lineno = start + i + 2
        if len(row) != len(header):
            raise CurveFormatError(f"row {lineno}: expected {len(header)} fields, got {len(row)}")
        for j, cell in enumerate(row):
            try:
                data[i, j] = float(cell)
            except ValueError:
                raise CurveFormatError(
                    f"row {lineno}, field {header[j]!r}: cannot parse {cell!r} as a number"
                ) from None
            if not np.isfinite(data[i, j]):
                raise CurveFormatError(f"row {lineno}, field {header[j]!r}: value is not finite")
    if data.shape[0] < 3:
        raise CurveFormatError(f"need at least 3 sample rows, got {data.shape[0]}")
    if "n" in preamble and int(preamble["n"]) != n:
        raise CurveFormatError(f"metadata declares n={preamble['n']} but header has n={n}")
    return _build(data[:, 1 : 1 + 2 * n], data[:, -1] if lifted else None, preamble)


def _build(samples, t, preamble):
    try:
        base = PlanarCurve(samples, closed=preamble.get("closed"))
        curve = base if t is None else HorizontalCurve(base, t)
    except ValueError as exc:
        raise CurveFormatError(str(exc)) from exc
    return curve, preamble.get("metadata", {})


def curve_to_json(curve, metadata=None):
    base, t = _split(curve)
    obj = {
        "n": base.n,
        "M": base.M,
        "closed": base.closed,
        "samples": base.samples.tolist(),
        "metadata": metadata or {},
    }
    if t is not None:
        obj["t"] = t.tolist()
    return obj


def curve_from_json(obj):
    """Inverse of :func:`curve_to_json`; returns ``(curve, metadata)``."""
    if not isinstance(obj, dict):
        raise CurveFormatError("curve JSON must be an object")
    for key in ("n", "samples"):
        if key not in obj:
            raise CurveFormatError(f"field {key!r}: missing")
    try:
        samples = np.asarray(obj["samples"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise CurveFormatError(f"field 'samples': not a numeric matrix ({exc})") from exc
    n = obj["n"]
    if samples.ndim != 2 or samples.shape[1] != 2 * n:
        raise CurveFormatError(f"field 'samples': expected rows of length {2 * n}, got shape {samples.shape}")
    t = None
    if obj.get("t") is not None:
        try:
            t = np.asarray(obj["t"], dtype=float)
        except (TypeError, ValueError) as exc:
            raise CurveFormatError(f"field 't': not a numeric vector ({exc})") from exc
    return _build(samples, t, obj)


def write_curve(curve, path, metadata=None):
    """Write ``path`` as both ``.csv`` and ``.json``; returns the two paths."""
    path = Path(path)
    csv_path, json_path = path.with_suffix(".csv"), path.with_suffix(".json")
    csv_path.write_text(curve_to_csv(curve, metadata))
    json_path.write_text(json.dumps(curve_to_json(curve, metadata)))
    return csv_path, json_path


def read_curve(path):
    """Read a curve file, choosing the format from the suffix."""
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".json":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise CurveFormatError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
        return curve_from_json(obj)
    return curve_from_csv(text)


def curves_equal(a, b):
    """Exact equality of samples, closedness and heights."""
    base_a, t_a = _split(a)
    base_b, t_b = _split(b)
    if base_a.closed != base_b.closed or not np.array_equal(base_a.samples, base_b.samples):
        return False
    if (t_a is None) != (t_b is None):
        return False
    return t_a is None or bool(np.array_equal(t_a, t_b))


def report_from_json(obj):
    """Rebuild the serialized fields of an :class:`IsoperimetricReport`."""
    circle = obj.get("circle")
    if circle is not None:
        circle = {key: np.asarray(val, dtype=float) for key, val in circle.items()}
    L2 = float(obj["L2"])
    D = float(obj["D"])
    return IsoperimetricReport(
        L2_parseval=L2,
        D=D,
        Dj=np.asarray(obj["Dj"], dtype=float),
        defect=float(obj["defect"]),
        termwise_defect_sum=float("nan"),
        equality_case=EqualityCase(obj["equality"]),
        circle_params=circle,
    )


def dumps(obj):
    """JSON text with lossless floats (``json`` already uses ``repr``)."""
    return json.dumps(obj, indent=2)
