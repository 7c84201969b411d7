"""Classical nonlinear filtering on a one-dimensional grid.

Covers Bayes conditioning of densities, the Gaussian signal-plus-noise example,
Markov kernels and the Chapman-Kolmogorov identity, Euler-Maruyama simulation
of a signal/observation pair

    dX = v(X) dt + sigma(X) dW,     dY = h(X) dt + dZ,

Kallianpur-Streibel path weights, and grid integrators for the Zakai
(Duncan-Mortensen-Zakai) and Kushner-Stratonovich equations.

The forward generator ``L^* rho = -(v rho)' + 1/2 (sigma^2 rho)''`` is
discretised in conservative form on a uniform grid: every node owns a cell
(half a cell at the two ends), fluxes live on cell faces and the outer faces
carry zero flux.  The trapezoid integral of ``rho`` is therefore conserved
exactly by the drift part of every step, so normalisation and expectations use
the same quadrature as the scheme.  Central fluxes stay positive while the
cell Peclet number ``|v| dx / (sigma^2 / 2)`` is at most 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import rng
from .diagnostics import InnovationsReport, innovations_report
from .errors import (
    CFLViolation,
    NonpositiveVariance,
    PositivityViolation,
    ZeroEvidence,
)

CFL_SAFETY = 0.5
EPS_EVIDENCE = 1e-300
POSITIVITY_REL_TOL = 1e-12


# ---------------------------------------------------------------------------
# grid densities
# ---------------------------------------------------------------------------

def trapezoid_weights(n: int, dx: float) -> np.ndarray:
    w = np.full(n, dx)
    w[0] = w[-1] = 0.5 * dx
    return w


@dataclass
class GridDensity:
    """Nonnegative function sampled on ``n`` uniform points of ``[x_min, x_max]``."""

    x_min: float
    x_max: float
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1 or self.values.size < 3:
            raise ValueError("a grid needs at least 3 points")
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")

    @classmethod
    def from_function(cls, f, x_min, x_max, n) -> "GridDensity":
        x = np.linspace(x_min, x_max, n)
        return cls(x_min, x_max, np.asarray(f(x), dtype=float))

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n)

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    @property
    def weights(self) -> np.ndarray:
        return trapezoid_weights(self.n, self.dx)

    def integral(self, f=None) -> float:
        vals = self.values if f is None else self.values * _on_grid(f, self.x)
        return float(self.weights @ vals)

    def normalized(self) -> "GridDensity":
        z = self.integral()
        if not z > 0:
            raise ZeroEvidence(f"density integrates to {z:.3g}")
        return GridDensity(self.x_min, self.x_max, self.values / z)

    def expect(self, f) -> float:
        """``int f rho / int rho``."""
        return self.integral(f) / self.integral()

    def mean(self) -> float:
        return self.expect(lambda x: x)

    def variance(self) -> float:
        mu = self.mean()
        return self.expect(lambda x: (x - mu) ** 2)

    def with_values(self, values) -> "GridDensity":
        return GridDensity(self.x_min, self.x_max, values)


def _on_grid(f, x):
    if callable(f):
        return np.broadcast_to(np.asarray(f(x), dtype=float), x.shape)
    return np.asarray(f, dtype=float)


def gaussian_pdf(x, mu, var):
    if var <= 0:
        raise NonpositiveVariance(f"variance {var} must be positive")
    return np.exp(-((np.asarray(x) - mu) ** 2) / (2 * var)) / math.sqrt(2 * math.pi * var)


def gaussian_density(mu, var, x_min, x_max, n) -> GridDensity:
    return GridDensity.from_function(lambda x: gaussian_pdf(x, mu, var), x_min, x_max, n)


# ---------------------------------------------------------------------------
# conditioning
# ---------------------------------------------------------------------------

def gaussian_posterior(mu0, s0sq, ssq, y):
    """Posterior of ``X ~ N(mu0, s0sq)`` after observing ``y = X + sigma Z``.

    Returns ``(mu1, s1sq)`` with ``1/s1sq = 1/s0sq + 1/ssq`` and
    ``mu1 = s1sq (mu0/s0sq + y/ssq)``.
    """
    if not (s0sq > 0 and ssq > 0):
        raise NonpositiveVariance("prior and noise variances must be positive")
    s1sq = 1.0 / (1.0 / s0sq + 1.0 / ssq)
    mu1 = s1sq * (mu0 / s0sq + y / ssq)
    return mu1, s1sq


def bayes_posterior_grid(prior: GridDensity, likelihood: Callable, y: float,
                         eps=EPS_EVIDENCE) -> GridDensity:
    """``rho_post(x|y) = lambda(y|x) rho_prior(x) / int lambda(y|x') rho_prior(x') dx'``."""
    lam = _on_grid(lambda x: likelihood(y, x), prior.x)
    joint = lam * prior.values
    evidence = float(prior.weights @ joint)
    if not evidence > eps:
        raise ZeroEvidence(f"evidence {evidence:.3g} below {eps:g}")
    return prior.with_values(joint / evidence)


def gaussian_likelihood(ssq):
    """``lambda(y|x)`` for ``y = x + sigma Z``."""
    return lambda y, x: gaussian_pdf(y - x, 0.0, ssq)


# ---------------------------------------------------------------------------
# Markov kernels
# ---------------------------------------------------------------------------

def wiener_kernel(x, t, x0, t0, diffusivity=1.0):
    """Heat kernel ``T(x, t | x0, t0)`` of ``dX = sqrt(diffusivity) dW``."""
    return gaussian_pdf(np.asarray(x) - x0, 0.0, diffusivity * (t - t0))


def misscaled_wiener_kernel(x, t, x0, t0, factor=2.0):
    """Negative control: the exponent uses variance ``factor (t - t0)`` but the
    normalisation is left at ``t - t0``, so the kernel is not a transition density."""
    dt = t - t0
    z = np.asarray(x) - x0
    return np.exp(-z ** 2 / (2 * factor * dt)) / math.sqrt(2 * math.pi * dt)


def chapman_kolmogorov_check(kernel, t0, t1, t2, x_min=-8.0, x_max=8.0, n=4001,
                             window=4.0, stride=20) -> float:
    """``max |int T(x,t2|x1,t1) T(x1,t1|x0,t0) dx1 - T(x,t2|x0,t0)|``.

    The intermediate variable ``x1`` runs over the full trapezoid grid; the
    outer pair ``(x, x0)`` is evaluated on every ``stride``-th grid point with
    ``|x| <= window``, away from the truncation edges.  Coincident times are
    treated as an identity kernel, for which the residual is 0 by convention.
    """
    if not t0 <= t1 <= t2:
        raise ValueError("times must satisfy t0 <= t1 <= t2")
    if t1 == t0 or t2 == t1:
        return 0.0
    x1 = np.linspace(x_min, x_max, n)
    w = trapezoid_weights(n, (x_max - x_min) / (n - 1))
    outer = x1[np.abs(x1) <= window][::stride]
    k1 = kernel(x1[:, None], t1, outer[None, :], t0)     # (x1, x0)
    k2 = kernel(outer[:, None], t2, x1[None, :], t1)     # (x, x1)
    composed = k2 @ (w[:, None] * k1)
    direct = kernel(outer[:, None], t2, outer[None, :], t0)
    return float(np.max(np.abs(composed - direct)))


# ---------------------------------------------------------------------------
# signal / observation pair
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiffusionSpec:
    """Drift ``v``, diffusion ``sigma`` and sensor ``h``; each maps arrays to arrays."""

    v: Callable
    sigma: Callable
    h: Callable
    sigma_floor: float = 1e-12

    def sigma_on(self, x):
        s = _on_grid(self.sigma, np.asarray(x, dtype=float))
        if np.any(s < self.sigma_floor):
            raise NonpositiveVariance(f"sigma falls below the floor {self.sigma_floor:g}")
        return s

    def check_finite(self, x):
        for name in ("v", "sigma", "h"):
            vals = _on_grid(getattr(self, name), x)
            if not np.all(np.isfinite(vals)):
                raise ValueError(f"{name} is not finite on the grid")

    @classmethod
    def linear(cls, a, sigma, c) -> "DiffusionSpec":
        """``dX = -a X dt + sigma dW``, ``dY = c X dt + dZ``."""
        return cls(lambda x: -a * x, lambda x: np.full_like(x, sigma, dtype=float), lambda x: c * x)


@dataclass
class ClassicalTrajectory:
    times: np.ndarray
    x_path: np.ndarray
    y_increments: np.ndarray
    seed: int
    innovations: np.ndarray = None
    estimates: dict = field(default_factory=dict)

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])


def _n_steps(t_final, dt):
    if dt <= 0 or t_final <= 0:
        raise ValueError("dt and t_final must be positive")
    n = int(round(t_final / dt))
    if abs(n * dt - t_final) > 1e-9 * t_final:
        raise ValueError(f"t_final={t_final} is not a multiple of dt={dt}")
    return n


def simulate_pairs(spec: DiffusionSpec, x0, t_final, dt, seed, n_paths, first_path=0):
    """Euler-Maruyama ensemble.  Path ``k`` draws ``dW`` from stream ``2k`` and ``dZ``
    from stream ``2k + 1``.  Returns ``(times, x_paths, y_increments)``."""
    n = _n_steps(t_final, dt)
    root = math.sqrt(dt)
    streams = [rng.Stream(seed, s) for k in range(first_path, first_path + n_paths) for s in (2 * k, 2 * k + 1)]
    draws = np.array([s.normal(n) for s in streams]).reshape(n_paths, 2, n) * root
    dw, dz = draws[:, 0], draws[:, 1]
    x = np.empty((n_paths, n + 1))
    x[:, 0] = x0
    dy = np.empty((n_paths, n))
    for j in range(n):
        xj = x[:, j]
        dy[:, j] = _on_grid(spec.h, xj) * dt + dz[:, j]
        x[:, j + 1] = xj + _on_grid(spec.v, xj) * dt + spec.sigma_on(xj) * dw[:, j]
    return np.arange(n + 1) * dt, x, dy


def simulate_pair(spec: DiffusionSpec, x0, t_final, dt, seed, path=0) -> ClassicalTrajectory:
    times, x, dy = simulate_pairs(spec, x0, t_final, dt, seed, 1, first_path=path)
    return ClassicalTrajectory(times, x[0], dy[0], seed)


def ks_weight_step(logw, x, dy, h, dt):
    """``log w + h(x) dy - 1/2 h(x)^2 dt`` (one Kallianpur-Streibel factor)."""
    hx = _on_grid(h, np.asarray(x, dtype=float)) if callable(h) else np.asarray(h, dtype=float)
    return logw + hx * dy - 0.5 * hx ** 2 * dt


def ks_particle_filter(spec: DiffusionSpec, x0_samples, dy, dt, seed, f=lambda x: x):
    """Weighted-particle estimate of ``E_t(f)`` along the record ``dy``.

    Particles follow the signal law (streams disjoint from the record's) and
    carry Kallianpur-Streibel log-weights.  Returns ``(estimates, ess)`` on the
    record grid, ``ess`` being the effective sample size.
    """
    x = np.array(x0_samples, dtype=float)
    n_p = x.size
    logw = np.zeros(n_p)
    noise = rng.normal_matrix(seed, n_p, len(dy), first_stream=1 << 20, scale=math.sqrt(dt))
    est, ess = [], []

    def record():
        w = np.exp(logw - logw.max())
        est.append(float(w @ _on_grid(f, x) / w.sum()))
        ess.append(float(w.sum() ** 2 / (w @ w)))

    record()
    for j, inc in enumerate(dy):
        logw = ks_weight_step(logw, x, inc, spec.h, dt)
        x = x + _on_grid(spec.v, x) * dt + spec.sigma_on(x) * noise[:, j]
        record()
    return np.array(est), np.array(ess)


# ---------------------------------------------------------------------------
# Zakai and Kushner on the grid
# ---------------------------------------------------------------------------

def check_cfl(rho: GridDensity, spec: DiffusionSpec, dt: float):
    smax = float(np.max(spec.sigma_on(rho.x)))
    limit = CFL_SAFETY * rho.dx ** 2 / max(smax ** 2, 1e-300)
    if dt > limit:
        raise CFLViolation(f"dt={dt:g} exceeds {CFL_SAFETY} dx^2 / max sigma^2 = {limit:.3g}")


def forward_generator(rho: GridDensity, spec: DiffusionSpec) -> np.ndarray:
    """Conservative central differences for ``-(v rho)' + 1/2 (sigma^2 rho)''`` with zero-flux ends."""
    x, r, dx = rho.x, rho.values, rho.dx
    v = _on_grid(spec.v, x)
    d = spec.sigma_on(x) ** 2
    flux = 0.5 * (v[:-1] * r[:-1] + v[1:] * r[1:]) - 0.5 * (d[1:] * r[1:] - d[:-1] * r[:-1]) / dx
    flux = np.concatenate([[0.0], flux, [0.0]])
    out = -(flux[1:] - flux[:-1]) / dx
    out[0] *= 2.0   # end nodes own half a cell
    out[-1] *= 2.0
    return out


def _check_positive(values, where, rel_tol=POSITIVITY_REL_TOL):
    """Reject negative values beyond roundoff (relative to the peak)."""
    low = float(values.min())
    if low < -rel_tol * float(np.max(np.abs(values))):
        raise PositivityViolation(f"{where}: density value {low:.3g} < 0; reduce dt")


def dmz_step(sigma_t: GridDensity, spec: DiffusionSpec, dy: float, dt: float,
             update="euler") -> GridDensity:
    """One step of ``d sigma = L^* sigma dt + h sigma dy`` for the unnormalised density.

    ``update="euler"`` multiplies by ``1 + h dy`` (Euler-Maruyama);
    ``update="exp"`` uses the exact observation factor ``exp(h dy - h^2 dt / 2)``
    of a Lie splitting, which keeps the density positive for any ``dy``.
    """
    check_cfl(sigma_t, spec, dt)
    r = _dmz_values(sigma_t, spec, dy, dt, update)
    _check_positive(r, "dmz_step")
    return sigma_t.with_values(r)


def _dmz_values(sigma_t, spec, dy, dt, update="euler"):
    h = _on_grid(spec.h, sigma_t.x)
    r = sigma_t.values + dt * forward_generator(sigma_t, spec)
    if update == "euler":
        return r + h * sigma_t.values * dy
    if update == "exp":
        return r * np.exp(h * dy - 0.5 * h * h * dt)
    raise ValueError(f"unknown update {update!r}")


def kushner_step(rho: GridDensity, spec: DiffusionSpec, dy: float, dt: float):
    """Euler step of the normalised filter.

    ``rho + L^* rho dt + (h - E_t h) rho dI`` with ``dI = dy - E_t(h) dt``
    evaluated at the left endpoint.  Returns ``(rho_new, dI)``.
    """
    check_cfl(rho, spec, dt)
    r, d_i = _kushner_values(rho, spec, dy, dt)
    _check_positive(r, "kushner_step")
    return rho.with_values(r), d_i


def _kushner_values(rho, spec, dy, dt):
    h = _on_grid(spec.h, rho.x)
    eh = rho.expect(h)
    d_i = dy - eh * dt
    return rho.values + dt * forward_generator(rho, spec) + (h - eh) * rho.values * d_i, d_i


@dataclass
class GridFilterRun:
    times: np.ndarray
    densities: list
    innovations: np.ndarray
    estimates: dict


def run_kushner(rho0: GridDensity, spec: DiffusionSpec, dy, dt, functions=None,
                keep_densities=False) -> GridFilterRun:
    """Kushner filter along a record; ``functions`` maps names to ``f`` for ``E_t(f)``."""
    fns = {"x": lambda x: x, "x2": lambda x: x * x}
    fns.update(functions or {})
    rho = rho0.normalized()
    est = {k: [rho.expect(f)] for k, f in fns.items()}
    dens = [rho] if keep_densities else []
    dis = []
    for inc in dy:
        rho, d_i = kushner_step(rho, spec, float(inc), dt)
        dis.append(d_i)
        for k, f in fns.items():
            est[k].append(rho.expect(f))
        if keep_densities:
            dens.append(rho)
    times = np.arange(len(dy) + 1) * dt
    return GridFilterRun(times, dens, np.array(dis), {k: np.array(v) for k, v in est.items()})


def kushner_ensemble(rho0: GridDensity, spec: DiffusionSpec, dy, dt):
    """Kushner filter run on many records at once (``dy`` has shape ``(n_paths, n_steps)``).

    Same scheme as :func:`kushner_step`, batched over paths.  Returns
    ``(means, variances)`` of shape ``(n_paths, n_steps + 1)``.
    """
    dy = np.atleast_2d(np.asarray(dy, dtype=float))
    check_cfl(rho0, spec, dt)
    x, w, dx = rho0.x, rho0.weights, rho0.dx
    v = _on_grid(spec.v, x)
    d = spec.sigma_on(x) ** 2
    h = _on_grid(spec.h, x)
    r = np.tile(rho0.normalized().values, (dy.shape[0], 1))
    means = np.empty((dy.shape[0], dy.shape[1] + 1))
    vars_ = np.empty_like(means)

    def moments(j):
        z = r @ w
        m1 = (r * x) @ w / z
        means[:, j] = m1
        vars_[:, j] = (r * x * x) @ w / z - m1 ** 2

    moments(0)
    for j in range(dy.shape[1]):
        flux = 0.5 * (v[:-1] * r[:, :-1] + v[1:] * r[:, 1:]) - 0.5 * (d[1:] * r[:, 1:] - d[:-1] * r[:, :-1]) / dx
        div = np.zeros_like(r)
        div[:, :-1] += flux
        div[:, 1:] -= flux
        div[:, 0] *= 2.0
        div[:, -1] *= 2.0
        eh = (r * h) @ w / (r @ w)
        d_i = dy[:, j] - eh * dt
        r = r - dt * div / dx + (h[None, :] - eh[:, None]) * r * d_i[:, None]
        _check_positive(r, "kushner_ensemble")
        moments(j + 1)
    return means, vars_


def run_dmz(sigma0: GridDensity, spec: DiffusionSpec, dy, dt, update="euler"):
    """Unnormalised DMZ along a record; returns the list of densities (start included)."""
    out = [sigma0]
    s = sigma0
    for inc in dy:
        s = dmz_step(s, spec, float(inc), dt, update=update)
        out.append(s)
    return out


def dmz_kushner_weak_discrepancy(rho: GridDensity, spec: DiffusionSpec, dt: float, n_nodes=40) -> float:
    """``int |E[normalised DMZ step] - E[Kushner step]| dx`` over one step.

    The expectation runs over ``dy = E_t(h) dt + sqrt(dt) Z`` by Gauss-Hermite
    quadrature; the two schemes agree in mean to second order in ``dt``.
    Quadrature nodes far in the tails may leave a step with negative values;
    the comparison is algebraic, so no positivity guard is applied here.
    """
    check_cfl(rho, spec, dt)
    rho = rho.normalized()
    eh = rho.expect(spec.h)
    nodes, weights = np.polynomial.hermite_e.hermegauss(n_nodes)
    weights = weights / weights.sum()
    acc = np.zeros(rho.n)
    for z, w in zip(nodes, weights):
        dy = eh * dt + math.sqrt(dt) * z
        a = _dmz_values(rho, spec, dy, dt)
        a = a / (rho.weights @ a)
        b = _kushner_values(rho, spec, dy, dt)[0]
        acc += w * (a - b)
    return float(rho.weights @ np.abs(acc))


# ---------------------------------------------------------------------------
# linear-Gaussian reference
# ---------------------------------------------------------------------------

def riccati_variance(a, sigma, c, p0, t):
    """Closed-form solution of ``dP/dt = -2aP + sigma^2 - c^2 P^2``."""
    t = np.asarray(t, dtype=float)
    if c == 0:
        if a == 0:
            return p0 + sigma ** 2 * t
        p_inf = sigma ** 2 / (2 * a)
        return p_inf + (p0 - p_inf) * np.exp(-2 * a * t)
    lam = math.sqrt(a * a + c * c * sigma * sigma)
    p_plus = (-a + lam) / c ** 2
    p_minus = (-a - lam) / c ** 2
    k = (p0 - p_plus) / (p0 - p_minus)
    e = k * np.exp(-2 * lam * t)
    return (p_plus - p_minus * e) / (1 - e)


def kalman_bucy(a, sigma, c, m0, p0, dy, dt):
    """Euler integration of ``dm = -a m dt + P c (dy - c m dt)`` and the Riccati ODE."""
    m = np.empty(len(dy) + 1)
    p = np.empty(len(dy) + 1)
    m[0], p[0] = m0, p0
    for j, inc in enumerate(dy):
        m[j + 1] = m[j] - a * m[j] * dt + p[j] * c * (inc - c * m[j] * dt)
        p[j + 1] = p[j] + (-2 * a * p[j] + sigma ** 2 - c ** 2 * p[j] ** 2) * dt
    return m, p


def innovations_diagnostics_classical(traj, max_lag=10) -> InnovationsReport:
    """Wiener statistics of one or several :class:`ClassicalTrajectory` innovations."""
    trajs = [traj] if isinstance(traj, ClassicalTrajectory) else list(traj)
    return innovations_report(np.array([t.innovations for t in trajs]), trajs[0].dt, max_lag)


def marginal_x(joint: np.ndarray, y_weights: np.ndarray) -> np.ndarray:
    """``int rho_{X,Y}(x, y) dy`` for a joint tabulated as ``(n_x, n_y)``."""
    return joint @ y_weights
