"""CSV / JSON / config-file formats and atomic file output.

Floats are written with 17 significant digits so that parsing them back
gives the identical double.
"""
import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path

from . import __version__
from .errors import InputError

FLAG_SEP = ";"


def fmt(x):
    """17-significant-digit text for a float; ``nan``/``inf`` spelled out."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def fmt_complex(z):
    z = complex(z)
    sign = "-" if math.copysign(1.0, z.imag) < 0 else "+"
    return f"{fmt(z.real)}{sign}{fmt(abs(z.imag))}i"


def parse_complex(text):
    """Parse ``a+bi`` / ``a-bi`` / ``bi`` / ``a`` literals (``j`` also accepted)."""
    s = str(text).strip().replace(" ", "").replace("I", "j").replace("i", "j")
    if "nan" in s.lower() or "inf" in s.lower():
        raise InputError(f"complex literal must be finite: {text!r}")
    try:
        return complex(s)
    except ValueError:
        raise InputError(f"not a complex literal: {text!r}") from None


def atomic_write(path, data):
    """Write ``data`` (str or bytes) to ``path`` through a temporary file and rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        if isinstance(data, bytes):
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
        else:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def sweep_to_csv(result):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([result.x_name, *result.names, "flags"])
    for row in result.rows:
        writer.writerow([fmt(row.x), *(fmt(v) for v in row.values), FLAG_SEP.join(row.flags)])
    return buf.getvalue()


def read_csv_table(text):
    """Parse a sweep CSV back into ``(x_name, names, xs, columns, flags)``."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise InputError("empty CSV") from None
    has_flags = header[-1] == "flags"
    names = header[1:-1] if has_flags else header[1:]
    if not names:
        raise InputError("CSV needs an x column and at least one value column")
    xs, columns, flags = [], [[] for _ in names], []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise InputError(f"line {lineno}: expected {len(header)} fields, got {len(row)}")
        try:
            xs.append(float(row[0]))
            for col, cell in zip(columns, row[1:1 + len(names)]):
                col.append(float(cell))
        except ValueError as exc:
            raise InputError(f"line {lineno}: {exc}") from None
        flags.append(tuple(row[-1].split(FLAG_SEP)) if has_flags else ())
    return header[0], tuple(names), xs, columns, flags


def _json_number(x):
    x = float(x)
    return x if math.isfinite(x) else None


def envelope(command, inputs, timing, **payload):
    """The ResultEnvelope: version, input echo, payload and timing."""
    out = {"tool": "qscatter", "version": __version__, "command": command, "input": inputs}
    out.update(payload)
    out["timing"] = timing
    return out


def sweep_payload(result):
    return {
        "columns": [result.x_name, *result.names],
        "rows": [[_json_number(row.x), *(_json_number(v) for v in row.values)]
                 for row in result.rows],
        "flags": [list(row.flags) for row in result.rows],
    }


def to_json(obj):
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def parse_config(text):
    """Flat ``key = value`` lines with ``#`` comments, or a JSON envelope.

    A JSON document with an ``input`` object (the echo written by ``--format
    json``) is accepted so a previous run can be replayed.
    """
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"config is not valid JSON: {exc}") from None
        values = doc.get("input", doc) if isinstance(doc, dict) else None
        if not isinstance(values, dict):
            raise InputError("JSON config must be an object")
        return {str(k): str(v) for k, v in values.items() if v is not None}
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise InputError(f"config line {lineno}: expected 'key = value'")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def load_config(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)


def config_text(inputs):
    return "".join(f"{k} = {v}\n" for k, v in inputs.items())
