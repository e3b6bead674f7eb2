"""Versioned JSON documents for model checkpoints and reports.

Every persisted model shares the envelope {format, version, kind, payload}.
Floats survive the round trip exactly (shortest-repr encoding of binary64).
"""

from __future__ import annotations

import json
from pathlib import Path

from .errors import DataError

FORMAT_NAME = "gnss-sentinel"
FORMAT_VERSION = 1


def save_document(path: str | Path, kind: str, payload: dict) -> Path:
    path = Path(path)
    doc = {"format": FORMAT_NAME, "version": FORMAT_VERSION, "kind": kind, "payload": payload}
    path.write_text(json.dumps(doc, separators=(",", ":"), sort_keys=True))
    return path


def load_document(path: str | Path, expected_kind: str | None = None) -> dict:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError:
        raise DataError(f"{path}: no such file") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: not a valid document ({exc})") from None
    if doc.get("format") != FORMAT_NAME:
        raise DataError(f"{path}: unknown format {doc.get('format')!r}")
    if doc.get("version") != FORMAT_VERSION:
        raise DataError(f"{path}: unsupported version {doc.get('version')}")
    if expected_kind is not None and doc.get("kind") != expected_kind:
        raise DataError(f"{path}: expected a {expected_kind} document, found {doc.get('kind')!r}")
    return doc["payload"]
