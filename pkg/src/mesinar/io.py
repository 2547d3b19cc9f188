"""Series files (CSV ``t,z``) and flat key-value documents."""

import csv
import io
import math

import numpy as np

from mesinar.errors import DomainError
from mesinar.model import IntSeries

__all__ = ["read_series", "write_series", "series_csv", "parse_kv", "format_kv", "read_kv"]


def read_series(path):
    """Read a series from CSV.

    Accepts the ``t,z`` layout written by :func:`write_series`, any CSV with a
    ``z`` column, or a single unlabeled numeric column.
    """
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        return IntSeries(np.array([], dtype=np.int64))
    header = [c.strip().lower() for c in rows[0]]
    if "z" in header:
        col = header.index("z")
        body = rows[1:]
        labels = [r[header.index("t")].strip() for r in body] if "t" in header else None
    else:
        col = len(rows[0]) - 1
        try:
            float(rows[0][col])
            body = rows
        except ValueError:
            body = rows[1:]
        labels = None
    values = []
    for lineno, r in enumerate(body, start=2 if body is not rows else 1):
        try:
            v = float(r[col])
        except (ValueError, IndexError):
            raise DomainError(f"line {lineno}: not a number: {r!r}", name="z") from None
        if not math.isfinite(v) or v != int(v):
            raise DomainError(f"line {lineno}: not an integer: {r[col]!r}", name="z")
        values.append(int(v))
    return IntSeries(np.array(values, dtype=np.int64), labels)


def series_csv(series):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "z"])
    vals = np.asarray(series)
    labels = getattr(series, "labels", None) or range(1, len(vals) + 1)
    for t, z in zip(labels, vals):
        w.writerow([t, int(z)])
    return buf.getvalue()


def write_series(series, path):
    with open(path, "w", newline="") as fh:
        fh.write(series_csv(series))


def parse_kv(text, source="<config>"):
    """Parse ``key: value`` (or ``key = value``) lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        for sep in (":", "="):
            if sep in line:
                key, value = line.split(sep, 1)
                break
        else:
            raise DomainError(f"{source}:{lineno}: expected 'key: value'", name=line)
        key = key.strip()
        if key in out:
            raise DomainError(f"{source}:{lineno}: duplicate key {key!r}", name=key)
        out[key] = value.strip()
    return out


def read_kv(path):
    with open(path) as fh:
        return parse_kv(fh.read(), source=str(path))


def _fmt(v):
    if isinstance(v, float):
        return repr(round(v, 10)) if math.isfinite(v) else str(v)
    if isinstance(v, (list, tuple)):
        return ", ".join(_fmt(x) for x in v)
    return str(v)


def format_kv(mapping):
    return "".join(f"{k}: {_fmt(v)}\n" for k, v in mapping.items())
