"""Belavkin filter for homodyne detection of a single field channel with ``S = 1``.

The primary carrier is the unnormalized system vector ``chi`` of the
Belavkin-Zakai equation

    d chi = -(1/2 L^*L + iH) chi dt + L chi dy,

integrated with Euler-Maruyama.  Filter estimates are ratios
``<chi|X|chi> / <chi|chi>``.  To keep long runs finite, ``chi`` is rescaled
to unit length after every step and the discarded ``ln <chi|chi>`` is kept in a
running accumulator; the Zakai equation is linear, so this changes nothing
except floating-point range.

Measurement records come in two flavours (:class:`Mode`):

``FILTER_CONSISTENT``
    innovations ``dI ~ N(0, dt)`` are drawn and the record is
    ``dY = E_t(L + L^*) dt + dI``: a sample of the physical output law.
``REFERENCE_MEASURE``
    ``dy ~ N(0, dt)`` is drawn directly (Wiener reference law) and
    ``<chi|chi>`` is the likelihood of the path.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from . import rng
from .diagnostics import InnovationsReport, innovations_report
from .errors import (
    CollapsedNorm,
    DimensionMismatch,
    NormOverflow,
    ScatteringNotSupported,
    TruncationTooCoarse,
)
from .qp_core import as_state_vector, commutator, dag, opnorm
from .slh import SLHModel, adjoint_generator

EPS_NORM = 1e-300
LOG_NORM_LIMIT = math.log(1e100)


class Mode(enum.Enum):
    FILTER_CONSISTENT = "filter_consistent"
    REFERENCE_MEASURE = "reference_measure"


def _require_s_identity(model: SLHModel):
    if opnorm(model.S - np.eye(model.dim)) > 1e-12:
        raise ScatteringNotSupported("the filter only handles S = 1")


def zakai_drift(model: SLHModel) -> np.ndarray:
    """``-(1/2 L^*L + iH)``."""
    return -(0.5 * dag(model.L) @ model.L + 1j * model.H)


def zakai_step(chi, dy: float, model: SLHModel, dt: float) -> np.ndarray:
    """One Euler-Maruyama step ``chi + K chi dt + L chi dy`` with ``K = -(1/2 L^*L + iH)``."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    _require_s_identity(model)
    chi = np.asarray(chi, dtype=complex)
    if chi.shape != (model.dim,):
        raise DimensionMismatch(f"state shape {chi.shape} does not match model dim {model.dim}")
    return chi + (zakai_drift(model) @ chi) * dt + (model.L @ chi) * dy


def filter_expectation(chi, x, eps_norm=EPS_NORM) -> float:
    """``<chi|X|chi> / <chi|chi>`` for hermitian ``X``."""
    chi = np.asarray(chi, dtype=complex)
    n2 = float(np.vdot(chi, chi).real)
    if n2 < eps_norm:
        raise CollapsedNorm(f"<chi|chi> = {n2:.3g}")
    return float(np.vdot(chi, np.asarray(x) @ chi).real / n2)


def renormalize(chi, eps_norm=EPS_NORM):
    """Rescale ``chi`` to unit length.

    Returns ``(unit_chi, log_increment)`` where ``log_increment = ln <chi|chi>``
    (squared-norm convention), to be added to the running log-likelihood.
    """
    chi = np.asarray(chi, dtype=complex)
    n2 = float(np.vdot(chi, chi).real)
    if not n2 > eps_norm:
        raise CollapsedNorm(f"<chi|chi> = {n2:.3g}")
    return chi / math.sqrt(n2), math.log(n2)


# The rescaling policy used by the trajectory simulators.
renormalize_in_place_policy = renormalize


# ---------------------------------------------------------------------------
# trajectories
# ---------------------------------------------------------------------------

@dataclass
class TrajectoryRecord:
    times: np.ndarray
    dY: np.ndarray
    innovations: np.ndarray
    log_norms: np.ndarray
    filter_expectations: dict
    seed: int
    mode: Mode
    stream: int = 0

    @property
    def norms(self) -> np.ndarray:
        """``<chi_t|chi_t>`` (the path likelihood under the reference measure)."""
        return np.exp(self.log_norms)

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])


@dataclass
class Ensemble:
    """Batch of trajectories; row ``k`` was generated from stream ``first_stream + k``."""

    times: np.ndarray
    dY: np.ndarray            # (n_traj, n_steps)
    innovations: np.ndarray   # (n_traj, n_steps)
    log_norms: np.ndarray     # (n_traj, n_steps + 1)
    expectations: dict        # name -> (n_traj, n_steps + 1)
    seed: int
    mode: Mode
    first_stream: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def n_traj(self) -> int:
        return self.dY.shape[0]

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    def record(self, k: int) -> TrajectoryRecord:
        return TrajectoryRecord(
            times=self.times,
            dY=self.dY[k],
            innovations=self.innovations[k],
            log_norms=self.log_norms[k],
            filter_expectations={n: v[k] for n, v in self.expectations.items()},
            seed=self.seed,
            mode=self.mode,
            stream=self.first_stream + k,
        )

    def mean_and_se(self, name: str):
        v = self.expectations[name]
        n = v.shape[0]
        se = v.std(axis=0, ddof=1) / math.sqrt(n) if n > 1 else np.zeros(v.shape[1])
        return v.mean(axis=0), se


def _n_steps(t_final, dt):
    if dt <= 0 or t_final <= 0:
        raise ValueError("dt and t_final must be positive")
    n = int(round(t_final / dt))
    if abs(n * dt - t_final) > 1e-9 * t_final:
        raise ValueError(f"t_final={t_final} is not a multiple of dt={dt}")
    return n


def simulate_ensemble(model: SLHModel, psi0, t_final: float, dt: float, seed: int,
                      n_traj: int, mode: Mode = Mode.FILTER_CONSISTENT,
                      observables=None, first_stream: int = 0) -> Ensemble:
    """Simulate ``n_traj`` independent records, vectorised over trajectories.

    ``observables`` maps names to hermitian operators whose filter estimates are
    recorded; ``L+L*`` is always included.
    """
    _require_s_identity(model)
    psi0 = as_state_vector(psi0)
    if psi0.shape[0] != model.dim:
        raise DimensionMismatch("initial state dimension does not match the model")
    mode = Mode(mode)
    n = _n_steps(t_final, dt)
    obs = dict(observables or {})
    m_op = model.L + dag(model.L)
    obs.setdefault("L+L*", m_op)

    noise = rng.normal_matrix(seed, n_traj, n, first_stream=first_stream, scale=math.sqrt(dt))
    drift_t = (zakai_drift(model) * dt).T
    l_t = model.L.T
    m_t = m_op.T
    obs_t = {k: np.asarray(v, dtype=complex).T for k, v in obs.items()}

    chi = np.tile(psi0, (n_traj, 1))
    log_acc = np.zeros(n_traj)
    dY = np.empty((n_traj, n))
    dI = np.empty((n_traj, n))
    log_norms = np.empty((n_traj, n + 1))
    expect = {k: np.empty((n_traj, n + 1)) for k in obs}

    def record(j):
        log_norms[:, j] = log_acc
        for name, op_t in obs_t.items():
            expect[name][:, j] = np.einsum("ni,ni->n", chi.conj(), chi @ op_t).real

    record(0)
    for j in range(n):
        m = np.einsum("ni,ni->n", chi.conj(), chi @ m_t).real
        if mode is Mode.FILTER_CONSISTENT:
            dI[:, j] = noise[:, j]
            dY[:, j] = m * dt + noise[:, j]
        else:
            dY[:, j] = noise[:, j]
            dI[:, j] = noise[:, j] - m * dt
        chi = chi + chi @ drift_t + dY[:, j, None] * (chi @ l_t)
        n2 = np.einsum("ni,ni->n", chi.conj(), chi).real
        if np.any(~(n2 > EPS_NORM)):
            raise CollapsedNorm(f"<chi|chi> collapsed at step {j + 1}")
        log_acc = log_acc + np.log(n2)
        if np.any(log_acc > LOG_NORM_LIMIT):
            raise NormOverflow(f"<chi|chi> exceeded 1e100 at step {j + 1}; reduce dt")
        chi = chi / np.sqrt(n2)[:, None]
        record(j + 1)

    return Ensemble(
        times=np.arange(n + 1) * dt,
        dY=dY,
        innovations=dI,
        log_norms=log_norms,
        expectations=expect,
        seed=seed,
        mode=mode,
        first_stream=first_stream,
    )


def simulate_trajectory(model: SLHModel, psi0, t_final: float, dt: float, seed: int,
                        mode: Mode = Mode.FILTER_CONSISTENT, observables=None,
                        stream: int = 0) -> TrajectoryRecord:
    """Single record; identical to row ``stream`` of an ensemble with the same seed."""
    ens = simulate_ensemble(model, psi0, t_final, dt, seed, 1, mode, observables, first_stream=stream)
    return ens.record(0)


def zakai_norms(model: SLHModel, psi0, dy, dt: float) -> np.ndarray:
    """``<chi_t|chi_t>`` from integrating the Zakai equation on the record ``dy`` without rescaling."""
    chi = np.asarray(psi0, dtype=complex)
    out = [float(np.vdot(chi, chi).real)]
    for inc in dy:
        chi = zakai_step(chi, float(inc), model, dt)
        out.append(float(np.vdot(chi, chi).real))
    return np.array(out)


def innovations_diagnostics(rec, dt: float = None, max_lag=10) -> InnovationsReport:
    """Wiener statistics of the innovations of a record, an ensemble, or a list of records."""
    if isinstance(rec, Ensemble):
        return innovations_report(rec.innovations, rec.dt, max_lag)
    if isinstance(rec, TrajectoryRecord):
        return innovations_report(rec.innovations[None, :], rec.dt, max_lag)
    recs = list(rec)
    return innovations_report(np.array([r.innovations for r in recs]), recs[0].dt, max_lag)


def trajectory_csv_header(rec: TrajectoryRecord):
    return ["t", "dY", "dI", "log_norm"] + list(rec.filter_expectations)


def trajectory_csv_rows(rec: TrajectoryRecord):
    """Rows ``t, dY, dI, ln<chi|chi>, E_t(X)...``; increments of step ``k`` sit on row ``k + 1``."""
    nan = float("nan")
    for j, t in enumerate(rec.times):
        row = [float(t)]
        if j == 0:
            row += [nan, nan]
        else:
            row += [float(rec.dY[j - 1]), float(rec.innovations[j - 1])]
        row.append(float(rec.log_norms[j]))
        row += [float(v[j]) for v in rec.filter_expectations.values()]
        yield row


def ensemble_csv_header(ens: Ensemble):
    cols = ["t"]
    for name in ens.expectations:
        cols += [f"mean_{name}", f"se_{name}"]
    return cols


def ensemble_csv_rows(ens: Ensemble):
    stats = [ens.mean_and_se(name) for name in ens.expectations]
    for j, t in enumerate(ens.times):
        row = [float(t)]
        for mean, se in stats:
            row += [float(mean[j]), float(se[j])]
        yield row


def mode_crosscheck(model: SLHModel, psi0, t_final: float, dt: float, seed: int, n_traj: int) -> dict:
    """First and second moments of ``Y(T)`` under the output law, computed two ways.

    Directly from FILTER_CONSISTENT records, and as likelihood-weighted averages
    ``E_W[<chi_T|chi_T> Y(T)^k]`` over REFERENCE_MEASURE records (disjoint
    streams).  Each entry carries a Monte Carlo standard error.
    """
    f = simulate_ensemble(model, psi0, t_final, dt, seed, n_traj, Mode.FILTER_CONSISTENT)
    r = simulate_ensemble(model, psi0, t_final, dt, seed, n_traj, Mode.REFERENCE_MEASURE,
                          first_stream=n_traj)
    yf = f.dY.sum(axis=1)
    yr = r.dY.sum(axis=1)
    w = np.exp(r.log_norms[:, -1])
    out = {}
    for k in (1, 2):
        a, b = yf ** k, w * yr ** k
        out[f"moment{k}"] = {
            "filter": float(a.mean()),
            "filter_se": float(a.std(ddof=1) / math.sqrt(n_traj)),
            "reference": float(b.mean()),
            "reference_se": float(b.std(ddof=1) / math.sqrt(n_traj)),
        }
    return out


# ---------------------------------------------------------------------------
# expectation (conditional density) form
# ---------------------------------------------------------------------------

def filter_step_density(rho, model: SLHModel, dY: float, dt: float) -> np.ndarray:
    """Euler step of the normalized filter carried as a conditional density.

    ``rho + L^*rho dt + (L rho + rho L^* - m rho) dI`` with
    ``m = tr((L + L^*) rho)`` and ``dI = dY - m dt``.  Every estimate
    ``E_t(X) = tr(rho X)`` then moves by
    ``E_t(L X) dt + {E_t(XL + L^*X) - E_t(X) E_t(L + L^*)} dI``.
    """
    _require_s_identity(model)
    rho = np.asarray(rho, dtype=complex)
    L, Ld = model.L, dag(model.L)
    m = float(np.trace((L + Ld) @ rho).real)
    d_i = dY - m * dt
    return rho + adjoint_generator(model, rho) * dt + (L @ rho + rho @ Ld - m * rho) * d_i


def filter_step_expectation_form(rho, model: SLHModel, observables: dict, dY: float, dt: float):
    """Advance the conditional density one step and return ``(rho_new, {name: E_t(X)})``."""
    new = filter_step_density(rho, model, dY, dt)
    est = {name: float(np.trace(new @ x).real) for name, x in observables.items()}
    return new, est


def normalized_zakai_density(psi, model: SLHModel, dy: float, dt: float) -> np.ndarray:
    chi = zakai_step(psi, dy, model, dt)
    chi = chi / np.linalg.norm(chi)
    return np.outer(chi, chi.conj())


def weak_step_discrepancy(model: SLHModel, psi, dt: float, n_nodes=40) -> float:
    """``|| E[normalized Zakai step] - E[density-filter step] ||`` over one step.

    The record increment is ``dy = m dt + sqrt(dt) Z`` with ``Z ~ N(0, 1)``
    (the output law given the current estimate); the expectation over ``Z`` is
    taken with Gauss-Hermite quadrature, so the result is deterministic.  The
    two schemes agree in mean to second order in ``dt``.
    """
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    rho = np.outer(psi, psi.conj())
    m = float(np.trace((model.L + dag(model.L)) @ rho).real)
    nodes, weights = np.polynomial.hermite_e.hermegauss(n_nodes)
    weights = weights / weights.sum()
    mean_z = np.zeros_like(rho)
    mean_f = np.zeros_like(rho)
    for z, w in zip(nodes, weights):
        dy = m * dt + math.sqrt(dt) * z
        mean_z += w * normalized_zakai_density(psi, model, dy, dt)
        mean_f += w * filter_step_density(rho, model, dy, dt)
    return opnorm(mean_z - mean_f)


def density_ratio_gap(model: SLHModel, psi0, t_final: float, dt: float, seed: int, stream: int = 0) -> float:
    """Largest ``|| rho_t - chi_t chi_t^* / <chi_t|chi_t> ||`` along one FILTER_CONSISTENT record.

    Both carriers are driven by the same ``dY``; the gap is the pathwise
    difference of two Euler-Maruyama schemes and shrinks as ``dt`` is refined.
    """
    rec = simulate_trajectory(model, psi0, t_final, dt, seed, stream=stream)
    chi = as_state_vector(psi0)
    rho = np.outer(chi, chi.conj())
    gap = 0.0
    for dy in rec.dY:
        rho = filter_step_density(rho, model, float(dy), dt)
        chi, _ = renormalize(zakai_step(chi, float(dy), model, dt))
        gap = max(gap, opnorm(rho - np.outer(chi, chi.conj())))
    return gap

# ---------------------------------------------------------------------------
# non-demolition on a repeated-interaction truncation
# ---------------------------------------------------------------------------

MAX_SLOTS = 3

_B = np.array([[0, 1], [0, 0]], dtype=complex)  # field-slot annihilator, vacuum = |0>


@dataclass
class NonDemolitionReport:
    residual: float
    bound: float
    pairs_checked: int
    dt_slot: float
    n_slots: int


def hermitian_basis(d: int):
    """Unit-norm hermitian matrix units: ``E_jj``, ``(E_jk + E_kj)``, ``i(E_kj - E_jk)``."""
    out = []
    for j in range(d):
        e = np.zeros((d, d), dtype=complex)
        e[j, j] = 1
        out.append(e)
    for j in range(d):
        for k in range(j + 1, d):
            e = np.zeros((d, d), dtype=complex)
            e[j, k] = e[k, j] = 1
            out.append(e)
            f = np.zeros((d, d), dtype=complex)
            f[j, k], f[k, j] = -1j, 1j
            out.append(f)
    return out


class RepeatedInteraction:
    """System coupled to ``n_slots`` field qubits, one per time slot of length ``dt_slot``.

    During slot ``k`` the joint generator is
    ``G_k = sqrt(tau) (L (x) b_k^* - L^* (x) b_k) - i tau H``, applied
    continuously, so ``U(t)`` interpolates inside a slot.  The discretised input
    quadrature is ``Y_in(s) = sqrt(tau) sum_k w_k(s) (b_k + b_k^*)`` with
    ``w_k(s)`` the covered fraction of slot ``k``.
    """

    def __init__(self, model: SLHModel, dt_slot: float, n_slots: int):
        if not 1 <= n_slots <= MAX_SLOTS:
            raise ValueError(f"n_slots must be between 1 and {MAX_SLOTS}")
        if dt_slot <= 0:
            raise ValueError("dt_slot must be positive")
        _require_s_identity(model)
        self.model = model
        self.tau = dt_slot
        self.m = n_slots
        d = model.dim
        self.d = d
        self.dim = d * 2 ** n_slots
        self.b = [self._slot_op(_B, k) for k in range(n_slots)]
        self.q = [b + dag(b) for b in self.b]
        root = math.sqrt(dt_slot)
        self.gen = [
            root * (np.kron(model.L, np.eye(2 ** n_slots)) @ dag(b)
                    - np.kron(dag(model.L), np.eye(2 ** n_slots)) @ b)
            - 1j * dt_slot * np.kron(model.H, np.eye(2 ** n_slots))
            for b in self.b
        ]
        self.full = [expm(g) for g in self.gen]

    @property
    def horizon(self) -> float:
        return self.m * self.tau

    def _slot_op(self, op, k):
        return np.kron(np.eye(self.d), np.kron(np.eye(2 ** k), np.kron(op, np.eye(2 ** (self.m - k - 1)))))

    def system_op(self, x):
        return np.kron(x, np.eye(2 ** self.m))

    def _locate(self, t):
        if t < -1e-15 or t > self.horizon * (1 + 1e-12):
            raise ValueError(f"time {t} outside [0, {self.horizon}]")
        k = min(int(t / self.tau), self.m - 1)
        return k, min(max(t / self.tau - k, 0.0), 1.0)

    def unitary(self, t: float) -> np.ndarray:
        k, f = self._locate(t)
        u = np.eye(self.dim, dtype=complex)
        for j in range(k):
            u = self.full[j] @ u
        return expm(f * self.gen[k]) @ u

    def input_quadrature(self, s: float) -> np.ndarray:
        k, f = self._locate(s)
        y = sum((self.q[j] for j in range(k)), np.zeros((self.dim, self.dim), dtype=complex))
        return math.sqrt(self.tau) * (y + f * self.q[k])

    def heisenberg(self, x, t):
        u = self.unitary(t)
        return dag(u) @ self.system_op(x) @ u

    def output_quadrature(self, s):
        u = self.unitary(s)
        return dag(u) @ self.input_quadrature(s) @ u

    def residual(self, x, t, s) -> float:
        if s > t:
            raise ValueError(f"non-demolition is only claimed for t >= s (got t={t}, s={s})")
        return opnorm(commutator(self.heisenberg(x, t), self.output_quadrature(s)))

    def bound(self, x, t, s) -> float:
        """Worst-case size of the commutator from the partially covered slot of ``s``."""
        ks, fs = self._locate(s)
        kt, ft = self._locate(t)
        g = (ft - fs) if kt == ks else (1.0 - fs)
        gen_norm = 2 * math.sqrt(self.tau) * opnorm(self.model.L) + self.tau * opnorm(self.model.H)
        return 4 * fs * math.sqrt(self.tau) * g * opnorm(x) * gen_norm


def nondemolition_check(model: SLHModel, t_grid, s_grid, dt_slot: float, n_slots: int = 2,
                        observables=None, tol=None) -> NonDemolitionReport:
    """Largest ``|| [j_t(X), Y_out(s)] ||`` over grid pairs with ``t > s``.

    Exact in the continuum; on the truncation it only fails to vanish when
    ``s`` falls inside a slot.  ``tol``, when given, must dominate the reported
    analytic bound, otherwise :class:`TruncationTooCoarse` is raised.
    """
    ri = RepeatedInteraction(model, dt_slot, n_slots)
    xs = hermitian_basis(model.dim) if observables is None else list(observables)
    pairs = [(t, s) for t in t_grid for s in s_grid if t > s]
    if not pairs:
        raise ValueError("no grid pairs with t > s")
    residual = 0.0
    bound = 0.0
    for t, s in pairs:
        y_out = ri.output_quadrature(s)
        u = ri.unitary(t)
        for x in xs:
            jx = dag(u) @ ri.system_op(x) @ u
            residual = max(residual, opnorm(commutator(jx, y_out)))
            bound = max(bound, ri.bound(x, t, s))
    if tol is not None and bound > tol:
        raise TruncationTooCoarse(f"discretisation bound {bound:.3g} exceeds tolerance {tol:g}")
    return NonDemolitionReport(residual, bound, len(pairs), dt_slot, n_slots)
