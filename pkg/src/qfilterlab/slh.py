"""Single-channel SLH models: generators, Heisenberg-Langevin coefficients, outputs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .qp_core import as_operator, commutator, anticommutator, dag, opnorm

VALID_TOL = 1e-10


@dataclass(frozen=True)
class SLHModel:
    """Scattering ``S`` (unitary), coupling ``L`` and Hamiltonian ``H`` for one field channel."""

    S: np.ndarray
    L: np.ndarray
    H: np.ndarray

    def __post_init__(self):
        s, l, h = (as_operator(m) for m in (self.S, self.L, self.H))
        if not s.shape == l.shape == h.shape:
            raise DimensionMismatch(f"S, L, H shapes differ: {s.shape}, {l.shape}, {h.shape}")
        object.__setattr__(self, "S", s)
        object.__setattr__(self, "L", l)
        object.__setattr__(self, "H", h)

    @property
    def dim(self) -> int:
        return self.H.shape[0]

    @classmethod
    def emission(cls, L, H=None) -> "SLHModel":
        """``S = 1`` model, the case the filter handles."""
        L = as_operator(L)
        d = L.shape[0]
        return cls(np.eye(d), L, np.zeros((d, d)) if H is None else H)

    def _check(self, x):
        x = np.asarray(x)
        if x.shape != self.H.shape:
            raise DimensionMismatch(f"operator shape {x.shape} != model shape {self.H.shape}")
        return x


@dataclass(frozen=True)
class ValidationReport:
    unitarity_residual: float
    hermiticity_residual: float
    tol: float = VALID_TOL

    @property
    def passed(self) -> bool:
        return self.unitarity_residual <= self.tol and self.hermiticity_residual <= self.tol


def validate(model: SLHModel, tol=VALID_TOL) -> ValidationReport:
    d = model.dim
    return ValidationReport(
        unitarity_residual=opnorm(dag(model.S) @ model.S - np.eye(d)),
        hermiticity_residual=opnorm(model.H - dag(model.H)),
        tol=tol,
    )


def scattering_from_hermitian(e) -> np.ndarray:
    """Cayley transform ``S = (1 + iE/2)(1 - iE/2)^{-1}`` of a hermitian ``E``."""
    e = as_operator(e)
    one = np.eye(e.shape[0])
    return (one + 0.5j * e) @ np.linalg.inv(one - 0.5j * e)


def lindblad_generator(model: SLHModel, x) -> np.ndarray:
    """``L X = 1/2 L^*[X, L] + 1/2 [L^*, X] L - i[X, H]`` (Heisenberg picture)."""
    x = model._check(x)
    L, Ld = model.L, dag(model.L)
    return 0.5 * Ld @ commutator(x, L) + 0.5 * commutator(Ld, x) @ L - 1j * commutator(x, model.H)


def adjoint_generator(model: SLHModel, rho) -> np.ndarray:
    """Trace dual of :func:`lindblad_generator`: ``-i[H, rho] + L rho L^* - 1/2 {L^*L, rho}``."""
    rho = model._check(rho)
    L, Ld = model.L, dag(model.L)
    return -1j * commutator(model.H, rho) + L @ rho @ Ld - 0.5 * anticommutator(Ld @ L, rho)


def dissipator_form(model: SLHModel, x) -> np.ndarray:
    """``L(X^2) - X L(X) - L(X) X``, equal to ``[L, X]^* [L, X]`` for hermitian ``X``."""
    gx = lindblad_generator(model, x)
    return lindblad_generator(model, x @ x) - x @ gx - gx @ x


@dataclass(frozen=True)
class LangevinCoefficients:
    drift: np.ndarray
    dB_coeff: np.ndarray
    dB_dag_coeff: np.ndarray
    dLambda_coeff: np.ndarray


def langevin_coefficients(model: SLHModel, x) -> LangevinCoefficients:
    """Coefficients of ``dj_t(X)`` at ``t = 0``.

    ``dj(X) = j(L X) dt + j([L^*, X] S) dB + j(S^*[X, L]) dB^* + j(S^* X S - X) dLambda``
    """
    x = model._check(x)
    S, Sd, L, Ld = model.S, dag(model.S), model.L, dag(model.L)
    return LangevinCoefficients(
        drift=lindblad_generator(model, x),
        dB_coeff=commutator(Ld, x) @ S,
        dB_dag_coeff=Sd @ commutator(x, L),
        dLambda_coeff=Sd @ x @ S - x,
    )


@dataclass(frozen=True)
class OutputDifferential:
    """``dB_out = dB_coeff dB + dt_coeff dt``."""

    dB_coeff: np.ndarray
    dt_coeff: np.ndarray

    def homodyne_drift(self) -> np.ndarray:
        """Drift ``L + L^*`` of the output quadrature ``dY_out = dY_in + (L + L^*) dt`` (S = 1)."""
        return self.dt_coeff + dag(self.dt_coeff)


def output_differential(model: SLHModel) -> OutputDifferential:
    return OutputDifferential(dB_coeff=model.S.copy(), dt_coeff=model.L.copy())


def wiener_driven_generator(H, R, x) -> np.ndarray:
    """Generator of a system kicked by classical Wiener noise: ``-i[X,H] - 1/2 [[X,R],R]``."""
    return -1j * commutator(x, H) - 0.5 * commutator(commutator(x, R), R)


def wiener_driven_model(H, R) -> SLHModel:
    """SLH model reproducing :func:`wiener_driven_generator`: ``S = 1``, ``L = -iR``."""
    R = as_operator(R)
    return SLHModel(np.eye(R.shape[0]), -1j * R, H)


def poisson_kick_generator(S, x) -> np.ndarray:
    """Generator for unitary kicks ``S`` at Poisson times: ``S^* X S - X``."""
    return dag(S) @ x @ S - x
