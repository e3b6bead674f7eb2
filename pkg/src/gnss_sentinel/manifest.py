"""Run manifests: config snapshot, content hashes per stage, timings.

Re-running a command with the same config and seed reproduces the same
stage hashes; timings and thread counts live under ``runtime`` and are
excluded from that comparison.
"""

from __future__ import annotations

import hashlib
import json
import time
from pathlib import Path

from . import __version__


def sha256_file(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


class Manifest:
    def __init__(self, config: dict, threads: int = 1):
        self.config = config
        self.threads = threads
        self.stages: dict[str, dict] = {}
        self.timings: dict[str, float] = {}

    def record_stage(self, name: str, files: list[Path], base: Path, seconds: float) -> None:
        hashes = {str(Path(f).relative_to(base)): sha256_file(f) for f in sorted(files)}
        self.stages[name] = hashes
        self.timings[name] = seconds

    def write(self, path: str | Path) -> Path:
        path = Path(path)
        doc = {
            "format": "gnss-sentinel-manifest",
            "toolkit_version": __version__,
            "config": self.config,
            "stages": self.stages,
            "runtime": {"threads": self.threads, "timings": self.timings},
        }
        path.write_text(json.dumps(doc, indent=2, sort_keys=True))
        return path


def read_manifest_stages(path: str | Path) -> dict:
    doc = json.loads(Path(path).read_text())
    return doc["stages"]


class StageTimer:
    def __init__(self):
        self.start = time.perf_counter()

    def seconds(self) -> float:
        return time.perf_counter() - self.start
