"""Deterministic JSON and CSV output for the reports."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from typing import Any, Iterable

import numpy as np

__all__ = ["SCHEMA_VERSION", "fmt", "to_plain", "dumps_json", "dumps_csv"]

SCHEMA_VERSION = 1
SIG_DIGITS = 12


def fmt(x: float) -> str:
    """Float text with 12 significant digits."""
    return f"{x:.{SIG_DIGITS}g}"


def _round(x: float):
    if not math.isfinite(x):
        return None if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return float(fmt(x))


def to_plain(obj: Any) -> Any:
    """Recursively convert dataclasses, numpy scalars and tuples into JSON
    types, rounding floats to 12 significant digits."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        out = {f.name: to_plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
        for name in ("holds", "sign_matches", "cond_verdict", "positive_on_sphere"):
            if hasattr(type(obj), name) and isinstance(getattr(type(obj), name), property):
                out[name] = to_plain(getattr(obj, name))
        return out
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _round(float(obj))
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_json(report_type: str, payload: Any) -> str:
    doc = {"schema_version": SCHEMA_VERSION, "report": report_type, "data": to_plain(payload)}
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


def dumps_csv(rows: Iterable[dict]) -> str:
    rows = list(rows)
    if not rows:
        return ""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: fmt(v) if isinstance(v, (float, np.floating)) else v for k, v in row.items()})
    return buf.getvalue()
