"""Von Neumann pointer measurement of a position-like observable on uniform grids.

A system wavefunction ``psi_prior(x)`` couples to a pointer with wavefunction
``phi(y)`` through ``exp(i mu X (x) P)``, which shifts the pointer by ``mu x``:

    Psi(x, y) = psi_prior(x) phi(y - mu x).

The shift is applied exactly by evaluating ``phi`` at the shifted points, so
``phi`` may be given as a callable or as a :class:`GridWavefunction` (complex
linear interpolation, zero outside its grid).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng
from .classical import GridDensity, trapezoid_weights
from .errors import SupportClipped, ZeroDensityPointer

CLIP_TOL = 1e-8
EPS_POINTER = 1e-300


@dataclass
class GridWavefunction:
    x_min: float
    x_max: float
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.ndim != 1 or self.amplitudes.size < 3:
            raise ValueError("a grid needs at least 3 points")

    @classmethod
    def from_function(cls, f, x_min, x_max, n) -> "GridWavefunction":
        return cls(x_min, x_max, f(np.linspace(x_min, x_max, n)))

    @property
    def n(self) -> int:
        return self.amplitudes.size

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n)

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    @property
    def weights(self) -> np.ndarray:
        return trapezoid_weights(self.n, self.dx)

    def density(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm2(self) -> float:
        return float(self.weights @ self.density())

    def normalized(self) -> "GridWavefunction":
        n2 = self.norm2()
        if not n2 > 0:
            raise ZeroDensityPointer("wavefunction has zero norm")
        return GridWavefunction(self.x_min, self.x_max, self.amplitudes / math.sqrt(n2))

    def as_density(self) -> GridDensity:
        return GridDensity(self.x_min, self.x_max, self.density())

    def __call__(self, y):
        """Complex linear interpolation; zero outside ``[x_min, x_max]``."""
        y = np.asarray(y, dtype=float)
        re = np.interp(y, self.x, self.amplitudes.real, left=0.0, right=0.0)
        im = np.interp(y, self.x, self.amplitudes.imag, left=0.0, right=0.0)
        return re + 1j * im


def gaussian_wavefunction(mu, var, x_min, x_max, n) -> GridWavefunction:
    """Amplitude ``(2 pi var)^(-1/4) exp(-(x - mu)^2 / (4 var))``, so ``|psi|^2 = N(mu, var)``."""
    return GridWavefunction.from_function(lambda x: gaussian_amplitude(x, mu, var), x_min, x_max, n)


def gaussian_amplitude(x, mu, var):
    return (2 * math.pi * var) ** -0.25 * np.exp(-((np.asarray(x) - mu) ** 2) / (4 * var))


@dataclass
class JointAmplitude:
    """``Psi(x, y)`` tabulated on ``psi_prior``'s x-grid times a uniform y-grid."""

    psi_prior: GridWavefunction
    phi: object
    mu: float
    y_min: float
    y_max: float
    values: np.ndarray  # (n_x, n_y)

    @property
    def y(self) -> np.ndarray:
        return np.linspace(self.y_min, self.y_max, self.values.shape[1])

    @property
    def y_weights(self) -> np.ndarray:
        n = self.values.shape[1]
        return trapezoid_weights(n, (self.y_max - self.y_min) / (n - 1))

    def total_mass(self) -> float:
        return float(self.psi_prior.weights @ (np.abs(self.values) ** 2) @ self.y_weights)


def joint_amplitude(psi_prior: GridWavefunction, phi, mu: float, y_min=None, y_max=None,
                    n_y=None, clip_tol=CLIP_TOL) -> JointAmplitude:
    """``Psi(x, y) = psi_prior(x) phi(y - mu x)`` on the product grid.

    The y-grid defaults to ``phi``'s own grid when ``phi`` is a
    :class:`GridWavefunction`.  More than ``clip_tol`` of the joint mass
    beyond the y-grid (see :func:`clipped_mass`) raises :class:`SupportClipped`.
    """
    if not math.isfinite(mu):
        raise ValueError("mu must be finite")
    if isinstance(phi, GridWavefunction):
        y_min = phi.x_min if y_min is None else y_min
        y_max = phi.x_max if y_max is None else y_max
        n_y = phi.n if n_y is None else n_y
    if y_min is None or y_max is None or n_y is None:
        raise ValueError("a y-grid is required when phi is a plain function")
    psi = psi_prior.normalized()
    x = psi.x
    y = np.linspace(y_min, y_max, n_y)
    values = psi.amplitudes[:, None] * np.asarray(phi(y[None, :] - mu * x[:, None]), dtype=complex)
    joint = JointAmplitude(psi, phi, mu, y_min, y_max, values)
    clipped = clipped_mass(psi, phi, mu, y_min, y_max, n_y)
    if clipped > clip_tol:
        raise SupportClipped(f"{clipped:.3g} of the pointer mass falls outside [{y_min}, {y_max}]")
    return joint


def clipped_mass(psi: GridWavefunction, phi, mu: float, y_min: float, y_max: float, n_y: int) -> float:
    """Fraction of ``int |Psi|^2`` lying beyond ``[y_min, y_max]``.

    ``|phi(y - mu x)|^2`` is integrated on the y-grid extended by one grid
    width on each side (same spacing, trapezoid rule), and the part beyond the
    original grid is weighted by ``|psi(x)|^2``.  Inside and outside use the
    same sampling of ``phi``, so interpolation error cancels in the ratio.
    """
    dy = (y_max - y_min) / (n_y - 1)
    n_ext = 3 * n_y - 2
    y_ext = y_min - (n_y - 1) * dy + dy * np.arange(n_ext)
    inside = slice(n_y - 1, 2 * n_y - 1)
    px = psi.weights * psi.density()
    total = 0.0
    outside = 0.0
    w_ext = trapezoid_weights(n_ext, dy)
    w_in = trapezoid_weights(n_y, dy)
    for chunk in np.array_split(np.arange(psi.n), max(1, psi.n // 256)):
        dens = np.abs(np.asarray(phi(y_ext[None, :] - mu * psi.x[chunk, None]), dtype=complex)) ** 2
        full = dens @ w_ext
        inner = dens[:, inside] @ w_in
        total += float(px[chunk] @ full)
        outside += float(px[chunk] @ (full - inner))
    return outside / total if total > 0 else 0.0


def pointer_pdf(joint: JointAmplitude) -> GridDensity:
    """``rho_Y(y) = int |psi_prior(x) phi(y - mu x)|^2 dx``, normalised over the y-grid."""
    rho = joint.psi_prior.weights @ (np.abs(joint.values) ** 2)
    return GridDensity(joint.y_min, joint.y_max, rho).normalized()


def posterior_wavefunction(joint: JointAmplitude, y: float, eps=EPS_POINTER) -> GridWavefunction:
    """``psi_post(x|y) = psi_prior(x) phi(y - mu x) / sqrt(rho_Y(y))``."""
    return posterior_from_prior(joint.psi_prior, joint.phi, joint.mu, y, eps)


def posterior_from_prior(psi_prior: GridWavefunction, phi, mu: float, y: float,
                         eps=EPS_POINTER) -> GridWavefunction:
    """Posterior wavefunction without tabulating the joint amplitude.

    ``rho_Y(y)`` is the x-quadrature of ``|psi_prior(x) phi(y - mu x)|^2``.
    """
    psi = psi_prior.normalized()
    amp = psi.amplitudes * np.asarray(phi(y - mu * psi.x), dtype=complex)
    rho_y = float(psi.weights @ (np.abs(amp) ** 2))
    if not rho_y > eps:
        raise ZeroDensityPointer(f"pointer density {rho_y:.3g} at y={y}")
    return GridWavefunction(psi.x_min, psi.x_max, amp / math.sqrt(rho_y))


def sample_pointer(joint: JointAmplitude, n_samples: int, seed: int, stream: int = 0) -> np.ndarray:
    """Inverse-CDF draws from :func:`pointer_pdf`.

    The CDF is the cumulative trapezoid rule on the y-grid and is inverted by
    linear interpolation; uniforms come from ``rng.Stream(seed, stream)``.
    """
    pdf = pointer_pdf(joint)
    y, r = pdf.x, pdf.values
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (r[1:] + r[:-1]) * pdf.dx)])
    cdf /= cdf[-1]
    u = rng.Stream(seed, stream).uniform(n_samples)
    return np.interp(u, cdf, y)


@dataclass
class SignalNoiseReport:
    sample_mean: float
    sample_var: float
    mean_se: float
    var_se: float
    expected_mean: float
    expected_var: float
    n_samples: int

    @property
    def mean_z(self) -> float:
        return abs(self.sample_mean - self.expected_mean) / self.mean_se if self.mean_se > 0 else 0.0

    @property
    def var_z(self) -> float:
        return abs(self.sample_var - self.expected_var) / self.var_se if self.var_se > 0 else 0.0

    @property
    def passed(self) -> bool:
        return self.mean_z <= 3.0 and self.var_z <= 3.0


def signal_noise_decomposition_check(psi_prior: GridWavefunction, phi, mu: float, n_samples: int,
                                     seed: int, y_min=None, y_max=None, n_y=None) -> SignalNoiseReport:
    """Compare pointer samples with ``Y = mu X + Y_in``.

    Expected moments: ``mean = mu E[X] + E_phi[Y]`` and
    ``var = mu^2 Var(X) + Var_phi(Y)``, from quadrature of ``|psi|^2`` and
    ``|phi|^2``.  Standard errors are ``s / sqrt(n)`` for the mean and
    ``sqrt((m4 - s^4) / n)`` for the variance.
    """
    joint = joint_amplitude(psi_prior, phi, mu, y_min, y_max, n_y)
    px = joint.psi_prior.as_density()
    phi_d = GridDensity(joint.y_min, joint.y_max, np.abs(np.asarray(phi(joint.y), dtype=complex)) ** 2)
    exp_mean = mu * px.mean() + phi_d.mean()
    exp_var = mu ** 2 * px.variance() + phi_d.variance()
    ys = sample_pointer(joint, n_samples, seed)
    m = float(ys.mean())
    c = ys - m
    s2 = float(np.mean(c ** 2))
    m4 = float(np.mean(c ** 4))
    return SignalNoiseReport(
        sample_mean=m,
        sample_var=float(c.var(ddof=1)),
        mean_se=math.sqrt(s2 / n_samples),
        var_se=math.sqrt(max(m4 - s2 ** 2, 0.0) / n_samples),
        expected_mean=float(exp_mean),
        expected_var=float(exp_var),
        n_samples=n_samples,
    )


def posterior_csv_rows(post: GridWavefunction):
    """Rows ``x, re psi, im psi, |psi|^2``."""
    for x, a in zip(post.x, post.amplitudes):
        yield [float(x), float(a.real), float(a.imag), float(abs(a) ** 2)]
