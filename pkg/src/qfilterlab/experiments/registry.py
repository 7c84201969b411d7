"""Named experiments, each tied to one acceptance criterion."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from ..errors import ExperimentUnknown
from . import library as lib


@dataclass(frozen=True)
class Experiment:
    name: str
    doc: str
    criterion: int
    params: dict
    runner: Callable
    reference_seed: int = 20240


_ENTRIES = [
    Experiment("qubit-decay-filter",
               "Filter ensemble mean of the excited population against the master equation",
               1, lib.QUBIT_DECAY_PARAMS, lib.qubit_decay_filter, 20240),
    Experiment("innovations-whiteness",
               "Innovations of the decay filter have Wiener statistics",
               2, lib.INNOVATIONS_PARAMS, lib.innovations_whiteness, 20240),
    Experiment("zakai-martingale",
               "Mean Zakai norm stays at 1 under the reference measure",
               3, lib.ZAKAI_PARAMS, lib.zakai_martingale, 31337),
    Experiment("ito-goldens",
               "Quantum Ito table and the quadrature, Wiener and Poisson identities",
               4, lib.ITO_PARAMS, lib.ito_goldens, 0),
    Experiment("ce-axioms",
               "Conditional-expectation axioms on random finite-dimensional instances",
               5, lib.CE_PARAMS, lib.ce_axioms, 1000),
    Experiment("covariance-lemma",
               "Covariance decomposition and conditional-covariance identities",
               6, lib.COV_PARAMS, lib.covariance_lemma, 2000),
    Experiment("takesaki-pos-neg",
               "Modular invariance decides whether the block formula is a conditional expectation",
               7, lib.TAKESAKI_PARAMS, lib.takesaki_pos_neg, 7),
    Experiment("gaussian-conditioning",
               "Grid Bayes posterior against the Gaussian closed form",
               8, lib.GAUSS_PARAMS, lib.gaussian_conditioning, 0),
    Experiment("vn-pointer-gaussian",
               "Von Neumann pointer posterior and signal-plus-noise moments",
               8, lib.VN_PARAMS, lib.vn_pointer_gaussian, 4242),
    Experiment("dmz-vs-kushner",
               "Normalised Zakai grid filter against the Kushner grid filter under dt halving",
               9, lib.DMZ_PARAMS, lib.dmz_vs_kushner, 99),
    Experiment("kalman-crosscheck",
               "Grid Kushner filter against Kalman-Bucy and the Riccati variance",
               9, lib.KALMAN_PARAMS, lib.kalman_crosscheck, 5150),
    Experiment("chapman-kolmogorov",
               "Chapman-Kolmogorov residual of the Wiener kernel with a mis-scaled control",
               10, lib.CK_PARAMS, lib.chapman_kolmogorov, 0),
    Experiment("nondemolition-truncated",
               "Output/system commutator on a repeated-interaction truncation under refinement",
               11, lib.ND_PARAMS, lib.nondemolition_truncated, 0),
    Experiment("determinism",
               "Two runs of the qubit-decay-filter config give byte-identical CSVs",
               12, lib.DETERMINISM_PARAMS, lib.determinism, 20240),
]

REGISTRY = {e.name: e for e in _ENTRIES}


def registry_list():
    """``(name, doc, criterion)`` sorted by name."""
    return [(e.name, e.doc, e.criterion) for e in sorted(_ENTRIES, key=lambda e: e.name)]


def get(name: str) -> Experiment:
    try:
        return REGISTRY[name]
    except KeyError:
        raise ExperimentUnknown(name) from None
