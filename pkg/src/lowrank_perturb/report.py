"""Deterministic JSON and CSV serialization of experiment reports.

JSON keys are sorted and floats are written with 17 significant digits, so
a report round-trips bit-exactly and two identical runs give identical
bytes.  Non-finite floats become ``null``.
"""

import csv
import io
import json
import math

import numpy as np

SCHEMA_VERSION = 1


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    s = format(x, ".17g")
    if s.lstrip("-").isdigit():
        s += ".0"
    return s


def _encode(obj, out):
    if obj is None:
        out.append("null")
    elif isinstance(obj, (bool, np.bool_)):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_fmt_float(float(obj)))
    elif isinstance(obj, str):
        out.append(_escape(obj))
    elif isinstance(obj, dict):
        out.append("{")
        for i, key in enumerate(sorted(obj, key=str)):
            if i:
                out.append(",")
            out.append(_escape(str(key)))
            out.append(":")
            _encode(obj[key], out)
        out.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(",")
            _encode(v, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def _escape(s):
    return json.dumps(s, ensure_ascii=False)


def dumps(obj) -> str:
    out = []
    _encode(obj, out)
    return "".join(out) + "\n"


def to_csv(report: dict) -> str:
    """Rows of (level, metric, mean, std) from a study report."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["level", "metric", "mean", "std"])
    for entry in report.get("levels", []):
        for name in sorted(entry["stats"]):
            st = entry["stats"][name]
            w.writerow([_fmt_float(entry["level"]), name,
                        _fmt_float(st["mean"]) if st["mean"] is not None else "",
                        _fmt_float(st["std"]) if st["std"] is not None else ""])
    return buf.getvalue()


def write_report(report: dict, path) -> None:
    path = str(path)
    text = to_csv(report) if path.endswith(".csv") else dumps(report)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
