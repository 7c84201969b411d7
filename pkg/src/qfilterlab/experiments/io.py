"""Output writers: CSV files, JSON documents and the run manifest."""

from __future__ import annotations

import csv
import hashlib
import json
import platform
from pathlib import Path

import numpy as np
import scipy
import sympy

from .. import __version__


def _cell(v):
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return repr(float(v))


def write_csv(path, header, rows):
    """Comma-separated, LF line endings, shortest round-trip floats (``repr``)."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])
    return path


def write_json(path, obj):
    path = Path(path)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n", encoding="utf-8")
    return path


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def versions() -> dict:
    return {
        "qfilterlab": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "sympy": sympy.__version__,
    }


class OutputSink:
    """Collects the files an experiment writes into one directory."""

    def __init__(self, directory):
        self.dir = Path(directory)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.files = []

    def csv(self, name, header, rows):
        p = write_csv(self.dir / name, header, rows)
        self.files.append(p)
        return p

    def json(self, name, obj):
        p = write_json(self.dir / name, obj)
        self.files.append(p)
        return p

    def manifest(self, config_text: str, seed: int, wall_clock: float):
        """Written last; checksums cover every file recorded so far."""
        doc = {
            "config_sha256": sha256_text(config_text),
            "seed": seed,
            "versions": versions(),
            "files": {p.name: sha256_file(p) for p in self.files},
            "wall_clock_s": wall_clock,
        }
        return write_json(self.dir / "manifest.json", doc)
