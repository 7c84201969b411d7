"""The acceptance suite: every criterion at its stated scale, one verdict each."""

from __future__ import annotations

import time

from .config import resolve_params
from .io import write_json
from .registry import REGISTRY

CRITERIA = {
    1: ("Filter/master-equation consistency", ["qubit-decay-filter"]),
    2: ("Innovations whiteness", ["innovations-whiteness"]),
    3: ("Zakai-norm martingale", ["zakai-martingale"]),
    4: ("Quantum Ito table goldens", ["ito-goldens"]),
    5: ("Conditional-expectation axioms", ["ce-axioms"]),
    6: ("Covariance decomposition", ["covariance-lemma"]),
    7: ("Modular invariance positive/negative pair", ["takesaki-pos-neg"]),
    8: ("Gaussian conditioning", ["gaussian-conditioning", "vn-pointer-gaussian"]),
    9: ("DMZ vs Kushner and Kalman-Bucy", ["dmz-vs-kushner", "kalman-crosscheck"]),
    10: ("Chapman-Kolmogorov", ["chapman-kolmogorov"]),
    11: ("Non-demolition truncation", ["nondemolition-truncated"]),
    12: ("Determinism", ["determinism"]),
}


def select(only=None):
    """Criterion numbers selected by ``only`` (a number, a criterion string or an experiment name)."""
    if only is None:
        return sorted(CRITERIA)
    if isinstance(only, int) or str(only).isdigit():
        n = int(only)
        if n not in CRITERIA:
            raise KeyError(f"no criterion {n}")
        return [n]
    if only in REGISTRY:
        return [REGISTRY[only].criterion]
    raise KeyError(f"unknown criterion or experiment {only!r}")


def run_criterion(n: int, overrides=None):
    """Verdict for criterion ``n``; ``overrides`` maps experiment names to parameter dicts."""
    overrides = overrides or {}
    title, names = CRITERIA[n]
    parts = []
    for name in names:
        exp = REGISTRY[name]
        params = resolve_params(exp.params, overrides.get(name, {}))
        t0 = time.perf_counter()
        res = exp.runner(params, exp.reference_seed, None)
        parts.append({"experiment": name, "passed": res["passed"], "metrics": res["metrics"],
                      "seconds": time.perf_counter() - t0})
    return {"criterion": n, "title": title, "passed": all(p["passed"] for p in parts), "parts": parts}


def run_acceptance(only=None, overrides=None, verdict_path=None, echo=None):
    """Run the selected criteria; write a JSON verdict file when ``verdict_path`` is given."""
    results = []
    for n in select(only):
        r = run_criterion(n, overrides)
        results.append(r)
        if echo is not None:
            echo(format_line(r))
    doc = {"passed": all(r["passed"] for r in results), "criteria": results}
    if verdict_path is not None:
        write_json(verdict_path, doc)
    return doc


def format_line(r) -> str:
    status = "PASS" if r["passed"] else "FAIL"
    return f"[{status}] criterion {r['criterion']:2d}: {r['title']}"
