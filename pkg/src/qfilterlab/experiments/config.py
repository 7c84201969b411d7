"""Strict experiment configuration.

A config file is a single JSON object::

    {
      "experiment": "qubit-decay-filter",
      "seed": 20240,
      "output_dir": "runs/decay",
      "params": {"n_traj": 500, "t_final": 2.0}
    }

``experiment`` is required; ``seed`` defaults to the experiment's reference
seed, ``output_dir`` to ``runs/<experiment>`` and ``params`` to the defaults.
Unknown keys at either level are rejected.  The environment variable
``QFILTERLAB_OUTPUT_DIR`` overrides ``output_dir`` and is the only
environment input.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

from ..errors import ConfigParseError, ExperimentUnknown

TOP_LEVEL_KEYS = {"experiment", "seed", "output_dir", "params"}
OUTPUT_DIR_ENV = "QFILTERLAB_OUTPUT_DIR"


@dataclass
class Param:
    """Schema entry: default value and kind.

    Kinds: ``pos_float``, ``float``, ``pos_int``, ``bool``, ``str``,
    ``operator`` and ``vector`` (see :mod:`qfilterlab.serialization`),
    ``float_list``.
    """

    default: object
    kind: str
    doc: str = ""


@dataclass
class ExperimentConfig:
    experiment: str
    seed: int
    output_dir: str
    params: dict = field(default_factory=dict)
    text: str = ""

    def resolved_output_dir(self) -> str:
        return os.environ.get(OUTPUT_DIR_ENV) or self.output_dir


def _fail(msg, key=None):
    raise ConfigParseError(msg if key is None else f"{key}: {msg}")


def _check_value(name, value, kind):
    if kind in ("pos_float", "float"):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            _fail(f"expected a number, got {value!r}", name)
        if kind == "pos_float" and not value > 0:
            _fail(f"must be positive, got {value!r}", name)
        return float(value)
    if kind == "pos_int":
        if isinstance(value, bool) or not isinstance(value, int) or value <= 0:
            _fail(f"expected a positive integer, got {value!r}", name)
        return value
    if kind == "bool":
        if not isinstance(value, bool):
            _fail(f"expected true or false, got {value!r}", name)
        return value
    if kind == "str":
        if not isinstance(value, str):
            _fail(f"expected a string, got {value!r}", name)
        return value
    if kind == "float_list":
        if not isinstance(value, list) or not all(
                isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
            _fail(f"expected a list of numbers, got {value!r}", name)
        return [float(v) for v in value]
    if kind in ("operator", "vector"):
        from .. import serialization

        try:
            return (serialization.decode_operator if kind == "operator" else serialization.decode_vector)(value)
        except (ValueError, TypeError) as exc:
            _fail(str(exc), name)
    raise AssertionError(kind)


def resolve_params(schema: dict, given: dict) -> dict:
    unknown = sorted(set(given) - set(schema))
    if unknown:
        _fail(f"unknown parameter(s) {unknown}; allowed: {sorted(schema)}", "params")
    out = {}
    for name, p in schema.items():
        out[name] = _check_value(name, given[name], p.kind) if name in given else _check_value(name, p.default, p.kind)
    return out


def parse_config(text: str, registry=None) -> ExperimentConfig:
    """Parse and validate config text; raises :class:`ConfigParseError` with line/column on bad JSON."""
    from . import registry as reg_mod

    registry = registry or reg_mod.REGISTRY
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigParseError(exc.msg, line=exc.lineno, column=exc.colno) from None
    if not isinstance(doc, dict):
        _fail("top level must be a JSON object")
    unknown = sorted(set(doc) - TOP_LEVEL_KEYS)
    if unknown:
        _fail(f"unknown key(s) {unknown}; allowed: {sorted(TOP_LEVEL_KEYS)}")
    if "experiment" not in doc:
        _fail("missing required key 'experiment'")
    name = doc["experiment"]
    if not isinstance(name, str):
        _fail("must be a string", "experiment")
    if name not in registry:
        raise ExperimentUnknown(name)
    entry = registry[name]
    seed = doc.get("seed", entry.reference_seed)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        _fail(f"expected a nonnegative integer, got {seed!r}", "seed")
    out_dir = doc.get("output_dir", f"runs/{name}")
    if not isinstance(out_dir, str):
        _fail("must be a string", "output_dir")
    params = doc.get("params", {})
    if not isinstance(params, dict):
        _fail("must be an object", "params")
    return ExperimentConfig(name, seed, out_dir, resolve_params(entry.params, params), text)


def load_config(path, registry=None) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigParseError(f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text, registry)
