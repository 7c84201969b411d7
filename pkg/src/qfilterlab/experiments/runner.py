"""Execute one configured experiment and write its artifacts."""

from __future__ import annotations

import json
import time

from .config import ExperimentConfig
from .io import OutputSink
from .registry import get


def run_experiment(cfg: ExperimentConfig, write=True):
    """Run ``cfg``; with ``write`` the CSVs, ``result.json`` and ``manifest.json`` (last) are written.

    Returns ``(result, output_dir or None)``.
    """
    exp = get(cfg.experiment)
    sink = OutputSink(cfg.resolved_output_dir()) if write else None
    t0 = time.perf_counter()
    result = exp.runner(cfg.params, cfg.seed, sink)
    wall = time.perf_counter() - t0
    result = {"experiment": exp.name, "criterion": exp.criterion, "seed": cfg.seed, **result}
    if sink is not None:
        sink.json("result.json", result)
        text = cfg.text or json.dumps({"experiment": cfg.experiment, "seed": cfg.seed}, sort_keys=True)
        sink.manifest(text, cfg.seed, wall)
        return result, sink.dir
    return result, None
