"""Plain-text ``key=value`` configuration files.

One assignment per line. Blank lines and lines starting with ``#`` are
ignored, as is anything after a ``#`` on an assignment line. Keys are
case-sensitive and may use ``-`` or ``_`` interchangeably. Values stay
strings; callers convert them.
"""

from __future__ import annotations

from pathlib import Path

from .errors import FormatError


def normalise_key(key: str) -> str:
    return key.strip().replace("-", "_")


def parse_config(text: str, path=None) -> dict:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError(f"expected key=value, got {raw.strip()!r}", path=path, lineno=lineno)
        key, value = line.split("=", 1)
        key = normalise_key(key)
        if not key:
            raise FormatError("empty key", path=path, lineno=lineno)
        if key in values:
            raise FormatError(f"duplicate key {key!r}", path=path, lineno=lineno)
        values[key] = value.strip()
    return values


def load_config(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise FormatError(f"cannot read config file: {exc}", path=path) from exc
    return parse_config(text, path)
