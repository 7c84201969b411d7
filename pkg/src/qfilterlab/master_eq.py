"""Deterministic Lindblad master equation, integrated with fixed-step RK4."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonHermitianObservable, PositivityViolation, StepTooLarge
from .qp_core import as_density_matrix, dag, opnorm
from .slh import SLHModel, adjoint_generator

TRACE_DRIFT_LIMIT = 1e-6
POSITIVITY_FLOOR = -1e-8


@dataclass
class MasterEqSolution:
    times: np.ndarray
    states: np.ndarray  # shape (n_times, d, d)

    def __len__(self):
        return len(self.times)

    def final(self) -> np.ndarray:
        return self.states[-1]


def _steps(t_final, dt):
    n = int(round(t_final / dt))
    if abs(n * dt - t_final) > 1e-9 * max(1.0, t_final):
        raise ValueError(f"t_final={t_final} is not a multiple of dt={dt}")
    return n


def propagate(model: SLHModel, rho0, t_final: float, dt: float, *, store_every=1,
              generator=None, guards=True) -> MasterEqSolution:
    """Integrate ``d rho / dt = L^* rho`` from ``rho0`` up to ``t_final``.

    ``generator(model, rho)`` replaces the adjoint Lindblad generator when given
    (used for negative controls).  Raises :class:`StepTooLarge` when the trace
    drifts by more than 1e-6 and :class:`PositivityViolation` when an
    eigenvalue drops below -1e-8; ``guards=False`` disables both checks so a
    deliberately unphysical generator can still be integrated.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if t_final < 0:
        raise ValueError("t_final must be non-negative")
    rho = as_density_matrix(rho0, tol=1e-10).copy()
    gen = adjoint_generator if generator is None else generator
    n = _steps(t_final, dt)
    times, states = [0.0], [rho.copy()]
    for k in range(1, n + 1):
        k1 = gen(model, rho)
        k2 = gen(model, rho + 0.5 * dt * k1)
        k3 = gen(model, rho + 0.5 * dt * k2)
        k4 = gen(model, rho + dt * k3)
        rho = rho + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if k % store_every == 0 or k == n:
            if not guards:
                times.append(k * dt)
                states.append(rho.copy())
                continue
            drift = abs(np.trace(rho) - 1.0)
            if drift > TRACE_DRIFT_LIMIT:
                raise StepTooLarge(f"trace drift {drift:.3g} at t={k * dt:g}; reduce dt")
            lam = np.linalg.eigvalsh((rho + dag(rho)) / 2).min()
            if lam < POSITIVITY_FLOOR:
                raise PositivityViolation(f"eigenvalue {lam:.3g} at t={k * dt:g}")
            times.append(k * dt)
            states.append(rho.copy())
    return MasterEqSolution(np.array(times), np.array(states))


def expectation_curve(sol: MasterEqSolution, x, tol=1e-10) -> np.ndarray:
    """``tr(rho_t X)`` on the solution grid, as an array of shape ``(n_times, 2)``: ``t, value``."""
    x = np.asarray(x, dtype=complex)
    if opnorm(x - dag(x)) > tol:
        raise NonHermitianObservable("expectation_curve needs a hermitian observable")
    vals = np.einsum("tij,ji->t", sol.states, x)
    if np.max(np.abs(vals.imag), initial=0.0) > tol:
        raise NonHermitianObservable("imaginary residue in expectation exceeds tolerance")
    return np.column_stack([sol.times, vals.real])


def csv_header(d: int):
    cols = ["t"]
    for i in range(d):
        for j in range(d):
            cols += [f"re_{i}{j}", f"im_{i}{j}"]
    return cols


def csv_rows(sol: MasterEqSolution):
    """Rows ``t, re rho_00, im rho_00, re rho_01, ...`` in row-major order."""
    d = sol.states.shape[1]
    flat = sol.states.reshape(len(sol.times), d * d)
    for t, row in zip(sol.times, flat):
        vals = [float(t)]
        for z in row:
            vals += [float(z.real), float(z.imag)]
        yield vals
