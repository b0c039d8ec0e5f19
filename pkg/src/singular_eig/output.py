"""Byte-stable JSON and CSV writers.

Floats are always written with 17 significant digits in scientific
notation, independent of locale, and lines end with ``\\n``.
"""
from __future__ import annotations

import json
import math
from typing import Any, Iterable, Sequence

import numpy as np


def format_float(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.16e}"


def _plain(obj: Any) -> Any:
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _dump(obj: Any, indent: int, level: int, out: list) -> None:
    obj = _plain(obj)
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        out.append("null")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        # JSON has no NaN/inf literals
        out.append(format_float(obj) if math.isfinite(obj) else "null")
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=True))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        items = list(obj.items())
        for i, (k, v) in enumerate(items):
            out.append(pad + json.dumps(str(k)) + ": ")
            _dump(v, indent, level + 1, out)
            out.append(",\n" if i < len(items) - 1 else "\n")
        out.append(end + "}")
    elif isinstance(obj, (list, tuple)):
        if not obj:
            out.append("[]")
            return
        if all(isinstance(_plain(v), (int, float)) and not isinstance(v, bool) for v in obj):
            out.append("[")
            out.append(", ".join(_scalar(v) for v in obj))
            out.append("]")
            return
        out.append("[\n")
        for i, v in enumerate(obj):
            out.append(pad)
            _dump(v, indent, level + 1, out)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(end + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def _scalar(v) -> str:
    v = _plain(v)
    if isinstance(v, float):
        return format_float(v) if math.isfinite(v) else "null"
    return str(v)


def dumps_json(obj: Any, indent: int = 2) -> str:
    out: list = []
    _dump(obj, indent, 0, out)
    out.append("\n")
    return "".join(out)


def _cell(v) -> str:
    v = _plain(v)
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format_float(v)
    s = str(v)
    if any(c in s for c in ",\n\r\""):
        raise ValueError(f"CSV cell needs quoting: {s!r}")
    return s


def dumps_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_cell(v) for v in row))
    return "\n".join(lines) + "\n"


def write_text(path: str | None, text: str, stream=None) -> None:
    """Write to ``path`` (binary, so newlines stay ``\\n``) or to ``stream``."""
    if path in (None, "-"):
        stream.write(text)
        return
    with open(path, "wb") as fh:
        fh.write(text.encode("ascii"))
