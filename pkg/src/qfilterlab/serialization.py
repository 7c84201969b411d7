"""JSON-style encoding of operators and state vectors.

An operator is ``{"re": [[...]], "im": [[...]]}`` with full-precision floats,
so ``decode_operator(json.loads(json.dumps(encode_operator(a))))`` returns
``a`` bit for bit.  Configuration files may also use a few named atoms:

``"identity(d)"``, ``"zeros(d)"``, ``"pauli_x"``, ``"pauli_y"``, ``"pauli_z"``,
``"sigma_minus"``, ``"sigma_plus"``, ``"excited"``, ``"ground"``,

and ``{"scale": s, "op": <operator>}`` for a real multiple.  Plain nested real
lists are accepted as well.
"""

from __future__ import annotations

import re

import numpy as np

from . import qp_core

_ATOMS = {
    "pauli_x": qp_core.PAULI_X,
    "pauli_y": qp_core.PAULI_Y,
    "pauli_z": qp_core.PAULI_Z,
    "sigma_minus": qp_core.SIGMA_MINUS,
    "sigma_plus": qp_core.SIGMA_PLUS,
}
_VECTOR_ATOMS = {
    "excited": np.array([1, 0], dtype=complex),
    "ground": np.array([0, 1], dtype=complex),
}
_SIZED = re.compile(r"^(identity|zeros)\((\d+)\)$")


def encode_operator(a) -> dict:
    a = np.asarray(a, dtype=complex)
    return {"re": a.real.tolist(), "im": a.imag.tolist()}


def encode_vector(v) -> dict:
    v = np.asarray(v, dtype=complex)
    return {"re": v.real.tolist(), "im": v.imag.tolist()}


def _decode_reim(obj, ndim):
    if set(obj) != {"re", "im"}:
        raise ValueError(f"expected keys 're' and 'im', got {sorted(obj)}")
    re_, im_ = np.array(obj["re"], dtype=float), np.array(obj["im"], dtype=float)
    if re_.shape != im_.shape or re_.ndim != ndim:
        raise ValueError("real and imaginary parts must have the same shape")
    return re_ + 1j * im_


def decode_operator(obj) -> np.ndarray:
    if isinstance(obj, str):
        if obj in _ATOMS:
            return np.array(_ATOMS[obj], dtype=complex)
        m = _SIZED.match(obj)
        if m:
            d = int(m.group(2))
            if d < 1:
                raise ValueError("dimension must be positive")
            return np.eye(d, dtype=complex) if m.group(1) == "identity" else np.zeros((d, d), dtype=complex)
        raise ValueError(f"unknown operator atom {obj!r}")
    if isinstance(obj, dict):
        if "scale" in obj:
            if set(obj) != {"scale", "op"}:
                raise ValueError("a scaled operator takes exactly 'scale' and 'op'")
            return float(obj["scale"]) * decode_operator(obj["op"])
        return qp_core.as_operator(_decode_reim(obj, 2))
    return qp_core.as_operator(np.array(obj, dtype=complex))


def decode_vector(obj) -> np.ndarray:
    if isinstance(obj, str):
        if obj in _VECTOR_ATOMS:
            return _VECTOR_ATOMS[obj].copy()
        raise ValueError(f"unknown vector atom {obj!r}")
    if isinstance(obj, dict):
        return _decode_reim(obj, 1)
    v = np.array(obj, dtype=complex)
    if v.ndim != 1:
        raise ValueError("a state vector must be one-dimensional")
    return v
