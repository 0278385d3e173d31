"""Bit-stable JSON and CSV serialization.

Floats are written with 17 significant digits so they round-trip exactly;
dict key order is preserved and lines end in LF.  Non-finite floats become
JSON ``null`` (and empty CSV cells).
"""

from __future__ import annotations

import json
import math
import sys
from typing import Any, Sequence


def format_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    s = format(x, ".17g")
    if not any(ch in s for ch in ".en"):
        s += ".0"
    return s


def _json(value: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if value is None or isinstance(value, bool):
        return json.dumps(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format_float(value)
    if hasattr(value, "item") and not isinstance(value, (list, tuple, dict)):
        return _json(value.item(), indent, level)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_json(v, indent, level + 1)}" for k, v in value.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        items = [pad + _json(v, indent, level + 1) for v in value]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def to_json(payload: Any, indent: int = 2) -> str:
    return _json(payload, indent, 0) + "\n"


def _cell(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return "" if not math.isfinite(v) else format_float(v)
    if hasattr(v, "item"):
        return _cell(v.item())
    s = str(v)
    if any(ch in s for ch in ',"\n'):
        s = '"' + s.replace('"', '""') + '"'
    return s


def to_csv(rows: Sequence[dict], columns: Sequence[str]) -> str:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_cell(row.get(c)) for c in columns))
    return "\n".join(lines) + "\n"


def emit_report(payload: Any, fmt: str = "json", path: str | None = None,
                columns: Sequence[str] | None = None) -> str:
    """Serialize ``payload`` and write it to ``path`` (stdout when None).

    CSV needs a list of row dicts; ``columns`` fixes the header (defaults to
    the keys of the first row).  Returns the text written.
    """
    if fmt == "json":
        text = to_json(payload)
    elif fmt == "csv":
        rows = payload if isinstance(payload, list) else [payload]
        cols = list(columns) if columns is not None else list(rows[0].keys()) if rows else []
        text = to_csv(rows, cols)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        try:
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            raise OSError(f"cannot write report to {path}: {exc.strerror or exc}") from exc
    return text
