"""Byte-stable JSON emission and atomic file writes.

The stock ``json`` module formats floats with shortest-repr, which is not the
output contract here: reports and snapshots serialize every float with 17
significant digits so files round-trip bit-exactly and are byte-identical
across runs and platforms. Keys are emitted sorted, lines end with ``\\n``.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path


def format_float(x: float) -> str:
    """17-significant-digit decimal form that parses back to the same float."""
    s = format(x, ".17g")
    if "." not in s and "e" not in s and "E" not in s:
        # force a float token so json round-trips -0.0 and integral values
        s += ".0"
    return s


def dumps_canonical(obj, indent: int = 2) -> str:
    """Serialize to deterministic JSON text (no trailing newline)."""
    pieces: list[str] = []
    _emit(obj, pieces, indent, 0)
    return "".join(pieces)


def _emit(obj, out: list[str], indent: int, level: int) -> None:
    pad = " " * (indent * level)
    inner = " " * (indent * (level + 1))
    if obj is None:
        out.append("null")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(format_float(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        keys = sorted(obj)
        for i, key in enumerate(keys):
            if not isinstance(key, str):
                raise TypeError(f"JSON object keys must be str, got {type(key).__name__}")
            out.append(inner)
            out.append(json.dumps(key, ensure_ascii=False))
            out.append(": ")
            _emit(obj[key], out, indent, level + 1)
            out.append(",\n" if i < len(keys) - 1 else "\n")
        out.append(pad + "}")
    elif isinstance(obj, (list, tuple)):
        if not obj:
            out.append("[]")
            return
        out.append("[\n")
        for i, item in enumerate(obj):
            out.append(inner)
            _emit(item, out, indent, level + 1)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(pad + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__} to canonical JSON")


def write_text_atomic(path: str | Path, text: str) -> None:
    """Write UTF-8 text via a temp file + rename so readers never see partials."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def write_json_atomic(path: str | Path, obj) -> None:
    write_text_atomic(path, dumps_canonical(obj) + "\n")


def read_json(path: str | Path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
