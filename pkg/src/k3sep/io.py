"""JSON file helpers shared by the loaders."""

from __future__ import annotations

import json
from pathlib import Path

from .errors import ParseError


def read_json(path):
    """Parse a JSON file; syntax errors are reported with their line number."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read file: {exc.strerror}", str(path)) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg} (column {exc.colno})", str(path), exc.lineno) from None


def write_json(data, path) -> None:
    with open(path, "w") as fh:
        json.dump(data, fh, indent=1, sort_keys=True)
        fh.write("\n")
