"""Deterministic serialization for machine output.

Floats are rendered with 17 significant digits, enough to round-trip any
IEEE double exactly, so two runs that compute identical numbers emit
byte-identical text.  JSON object keys keep insertion order; the CSV
writer pins the line terminator so output does not depend on platform.
"""
from __future__ import annotations

import csv
import io
import math
from typing import Iterable, Sequence

import numpy as np

__all__ = ["format_float", "dumps", "csv_text"]

_FLOAT_FORMAT = "%.17g"


def format_float(value: float) -> str:
    """17-significant-digit decimal form of a finite float."""
    return _FLOAT_FORMAT % float(value)


def _json_scalar(value) -> str:
    if value is None:
        return "null"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if not math.isfinite(v):
            return "null"
        return format_float(v)
    if isinstance(value, str):
        return _escape(value)
    raise TypeError(f"cannot serialize {type(value).__name__} to JSON")


def _escape(text: str) -> str:
    out = ['"']
    for ch in text:
        if ch == '"':
            out.append('\\"')
        elif ch == "\\":
            out.append("\\\\")
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\r":
            out.append("\\r")
        elif ch == "\t":
            out.append("\\t")
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04x}")
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


def _write(obj, pieces: list, indent: int, level: int) -> None:
    pad = " " * (indent * (level + 1))
    close_pad = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            pieces.append("{}")
            return
        pieces.append("{\n")
        for i, (key, value) in enumerate(obj.items()):
            if not isinstance(key, str):
                raise TypeError(f"JSON object keys must be strings, got {type(key).__name__}")
            pieces.append(pad)
            pieces.append(_escape(key))
            pieces.append(": ")
            _write(value, pieces, indent, level + 1)
            pieces.append(",\n" if i + 1 < len(obj) else "\n")
        pieces.append(close_pad + "}")
    elif isinstance(obj, (list, tuple)) or (isinstance(obj, np.ndarray) and obj.ndim == 1):
        items = list(obj)
        if not items:
            pieces.append("[]")
            return
        pieces.append("[\n")
        for i, value in enumerate(items):
            pieces.append(pad)
            _write(value, pieces, indent, level + 1)
            pieces.append(",\n" if i + 1 < len(items) else "\n")
        pieces.append(close_pad + "]")
    else:
        pieces.append(_json_scalar(obj))


def dumps(obj, indent: int = 2) -> str:
    """Deterministic JSON text for nested dicts, sequences, and scalars."""
    pieces: list = []
    _write(obj, pieces, indent, 0)
    return "".join(pieces)


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format_float(v)
    if isinstance(value, str):
        return value
    raise TypeError(f"cannot serialize {type(value).__name__} to CSV")


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    """CSV text with a pinned line terminator and deterministic cells."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(header))
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()
