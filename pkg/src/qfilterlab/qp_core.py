"""Finite-dimensional quantum probability.

Operators are plain complex ``numpy`` arrays of shape ``(d, d)`` and pure
states are arrays of shape ``(d,)``.  The small wrapper types below only exist
where an object carries more than one array (spectral data, a conditioning
algebra, a state).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateBlock,
    DimensionMismatch,
    IncompatibleObservable,
    NonFaithfulState,
    NotHermitian,
    ZeroProbabilityOutcome,
)

HERMITIAN_TOL = 1e-10
EPS_PROB = 1e-14
EPS_FAITHFUL = 1e-10


# ---------------------------------------------------------------------------
# basic operators
# ---------------------------------------------------------------------------

def as_operator(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"operator must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("operator has non-finite entries")
    return a


def dag(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def commutator(a, b):
    return a @ b - b @ a


def anticommutator(a, b):
    return a @ b + b @ a


def opnorm(a) -> float:
    """Spectral norm."""
    return float(np.linalg.norm(a, 2)) if np.size(a) else 0.0


def is_hermitian(a, tol=HERMITIAN_TOL) -> bool:
    return opnorm(a - dag(a)) <= tol


def is_unitary(u, tol=HERMITIAN_TOL) -> bool:
    return opnorm(dag(u) @ u - np.eye(u.shape[0])) <= tol


def is_projection(p, tol=HERMITIAN_TOL) -> bool:
    return is_hermitian(p, tol) and opnorm(p @ p - p) <= tol


def _same_dim(*ops):
    dims = {np.shape(o)[0] for o in ops}
    if len(dims) != 1:
        raise DimensionMismatch(f"dimension mismatch: {sorted(dims)}")
    return dims.pop()


# standard qubit operators
def identity(d: int) -> np.ndarray:
    return np.eye(d, dtype=complex)


PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
# basis ordering |e> = |0>, |g> = |1>, so sigma_minus |e> = |g>
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)
SIGMA_PLUS = dag(SIGMA_MINUS)


def ket(d: int, k: int) -> np.ndarray:
    v = np.zeros(d, dtype=complex)
    v[k] = 1.0
    return v


# ---------------------------------------------------------------------------
# states
# ---------------------------------------------------------------------------

def normalize(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    n = np.linalg.norm(psi)
    if n == 0:
        raise ZeroProbabilityOutcome("cannot normalize the zero vector")
    return psi / n


def as_state_vector(psi, tol=1e-10) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1:
        raise DimensionMismatch(f"state vector must be 1-d, got shape {psi.shape}")
    if abs(np.linalg.norm(psi) - 1.0) > tol:
        raise ValueError("state vector is not normalized")
    return psi


def as_density_matrix(rho, tol=1e-12) -> np.ndarray:
    """Validate ``rho`` as a density matrix (hermitian, unit trace, PSD)."""
    rho = as_operator(rho)
    if opnorm(rho - dag(rho)) > tol:
        raise NotHermitian("density matrix is not hermitian")
    if abs(np.trace(rho) - 1.0) > tol:
        raise ValueError(f"density matrix trace is {np.trace(rho).real!r}, not 1")
    if np.linalg.eigvalsh(rho).min() < -tol:
        raise ValueError("density matrix has a negative eigenvalue")
    return rho


def pure_density(psi) -> np.ndarray:
    psi = normalize(psi)
    return np.outer(psi, psi.conj())


@dataclass(frozen=True)
class QPState:
    """A normal state ``<X> = tr(rho X)`` on the full matrix algebra."""

    rho: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rho", as_density_matrix(self.rho))

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    @classmethod
    def tracial(cls, d: int) -> "QPState":
        return cls(np.eye(d, dtype=complex) / d)

    def expect(self, x) -> complex:
        x = np.asarray(x)
        _same_dim(self.rho, x)
        return complex(np.trace(self.rho @ x))


# ---------------------------------------------------------------------------
# spectral theory and measurement postulates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: tuple
    projections: tuple

    @property
    def dim(self) -> int:
        return self.projections[0].shape[0]

    def reconstruct(self) -> np.ndarray:
        return sum(a * p for a, p in zip(self.eigenvalues, self.projections))

    def algebra(self) -> "AlgebraSpec":
        return AlgebraSpec(self.projections)


def spectral_decompose(a, cluster_tol=None) -> SpectralDecomposition:
    """Group the eigenvectors of a hermitian ``a`` into eigenspace projections.

    Sorted eigenvalues closer than ``cluster_tol`` to their predecessor join
    the same eigenspace (chained), and the cluster is labelled by its mean.
    The default tolerance is ``1e-10 * max(||a||, 1)``.
    """
    a = as_operator(a)
    scale = max(opnorm(a), 1.0)
    if opnorm(a - dag(a)) > HERMITIAN_TOL * scale:
        raise NotHermitian("spectral_decompose needs a hermitian operator")
    if cluster_tol is None:
        cluster_tol = 1e-10 * scale
    if cluster_tol <= 0:
        raise ValueError("cluster_tol must be positive")
    w, v = np.linalg.eigh((a + dag(a)) / 2)
    groups = [[0]]
    for k in range(1, len(w)):
        if w[k] - w[k - 1] < cluster_tol:
            groups[-1].append(k)
        else:
            groups.append([k])
    eigenvalues = tuple(float(np.mean(w[g])) for g in groups)
    projections = tuple(v[:, g] @ dag(v[:, g]) for g in groups)
    return SpectralDecomposition(eigenvalues, projections)


def born_probabilities(spec: SpectralDecomposition, psi) -> dict:
    """Map each eigenvalue ``a`` to ``||P_a psi||**2``."""
    psi = as_state_vector(psi)
    if psi.shape[0] != spec.dim:
        raise DimensionMismatch("state and observable dimensions differ")
    return {a: float(np.linalg.norm(p @ psi) ** 2)
            for a, p in zip(spec.eigenvalues, spec.projections)}


def project_postulate(psi, p, eps_prob=EPS_PROB) -> np.ndarray:
    """Collapse ``psi`` onto ``range(p)`` and renormalize."""
    psi = np.asarray(psi, dtype=complex)
    _same_dim(p, np.empty((psi.shape[0], psi.shape[0])))
    out = p @ psi
    prob = float(np.vdot(out, out).real)
    if prob <= eps_prob:
        raise ZeroProbabilityOutcome(f"outcome probability {prob:.3g} <= {eps_prob:g}")
    return out / np.sqrt(prob)


def compatible(a, b, tol=1e-10) -> bool:
    _same_dim(a, b)
    return opnorm(commutator(a, b)) <= tol


def check_projection_commute_lemma(p, q, tol=1e-10) -> bool:
    """Evaluate the implication ``PQP = QP  =>  PQ = QP`` for two projections."""
    premise = opnorm(p @ q @ p - q @ p) <= tol
    conclusion = opnorm(p @ q - q @ p) <= tol
    return (not premise) or conclusion


# ---------------------------------------------------------------------------
# conditioning algebras and conditional expectation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AlgebraSpec:
    """Commutative algebra spanned by a complete family of orthogonal projections."""

    projections: tuple

    def __post_init__(self, tol=1e-10):
        projs = tuple(as_operator(p) for p in self.projections)
        if not projs:
            raise ValueError("need at least one projection")
        d = _same_dim(*projs)
        if opnorm(sum(projs) - np.eye(d)) > tol:
            raise ValueError("projections do not sum to the identity")
        for i, p in enumerate(projs):
            if not is_projection(p, tol):
                raise ValueError(f"element {i} is not an orthogonal projection")
            for q in projs[i + 1:]:
                if opnorm(p @ q) > tol:
                    raise ValueError("projections are not mutually orthogonal")
        object.__setattr__(self, "projections", projs)

    @property
    def dim(self) -> int:
        return self.projections[0].shape[0]

    @classmethod
    def trivial(cls, d: int) -> "AlgebraSpec":
        return cls((np.eye(d, dtype=complex),))

    @classmethod
    def from_observable(cls, a, cluster_tol=None) -> "AlgebraSpec":
        return spectral_decompose(a, cluster_tol).algebra()

    def element(self, coeffs) -> np.ndarray:
        """``sum_a c_a P_a``."""
        if len(coeffs) != len(self.projections):
            raise DimensionMismatch("one coefficient per projection required")
        return sum(c * p for c, p in zip(coeffs, self.projections))

    def coefficients(self, b) -> np.ndarray:
        """Hilbert-Schmidt coordinates of the projection of ``b`` onto the span."""
        return np.array([np.trace(p @ b) / np.trace(p).real for p in self.projections])

    def project(self, b) -> np.ndarray:
        return self.element(self.coefficients(b))

    def distance(self, b) -> float:
        """Spectral-norm distance from ``b`` to its projection onto the span."""
        return opnorm(b - self.project(b))

    def compress(self, m) -> np.ndarray:
        """``sum_a P_a m P_a``: the commutant part of ``m``."""
        return sum(p @ m @ p for p in self.projections)

    def commutant_residual(self, a) -> float:
        return max(opnorm(commutator(a, p)) for p in self.projections)


class ConditionalExpectation:
    """The map ``A -> sum_a tr(rho P_a A) / tr(rho P_a) P_a``.

    With ``require_commutant`` (the default) every argument must commute with
    the projections, which is where all the conditional-expectation axioms hold
    for an arbitrary state.  Blocks of probability at most ``eps_prob`` carry no
    information and are left out of the sum; their indices are listed in
    ``dropped``.  ``strict=True`` turns a dropped block into
    :class:`DegenerateBlock` instead.
    """

    def __init__(self, alg: AlgebraSpec, state: QPState, *, tol=1e-10,
                 eps_prob=EPS_PROB, require_commutant=True, strict=False):
        _same_dim(alg.projections[0], state.rho)
        self.alg = alg
        self.state = state
        self.tol = tol
        self.require_commutant = require_commutant
        probs = [state.expect(p).real for p in alg.projections]
        self.block_probabilities = tuple(probs)
        self.dropped = tuple(i for i, pa in enumerate(probs) if pa <= eps_prob)
        if strict and self.dropped:
            raise DegenerateBlock(f"blocks {self.dropped} have probability <= {eps_prob:g}")
        self._kept = [i for i in range(len(probs)) if i not in self.dropped]

    def __call__(self, a) -> np.ndarray:
        a = as_operator(a)
        _same_dim(a, self.state.rho)
        if self.require_commutant:
            res = self.alg.commutant_residual(a)
            if res > self.tol * max(1.0, opnorm(a)):
                raise IncompatibleObservable(
                    f"operator fails to commute with the conditioning projections (residual {res:.3g})")
        rho = self.state.rho
        out = np.zeros_like(a)
        for i in self._kept:
            p = self.alg.projections[i]
            out += (np.trace(rho @ p @ a) / self.block_probabilities[i]) * p
        return out

    def delta(self, a) -> np.ndarray:
        """``A - E[A]``."""
        return a - self(a)


def conditional_expectation(a, alg: AlgebraSpec, state: QPState, **kwargs) -> np.ndarray:
    return ConditionalExpectation(alg, state, **kwargs)(a)


# ---------------------------------------------------------------------------
# covariance
# ---------------------------------------------------------------------------

def covariance(x, y, state: QPState) -> complex:
    _same_dim(x, y, state.rho)
    return state.expect(dag(x) @ y) - np.conj(state.expect(x)) * state.expect(y)


def variance(x, state: QPState) -> float:
    return covariance(x, x, state).real


def conditional_covariance(x, y, alg: AlgebraSpec, state: QPState, **kwargs) -> np.ndarray:
    """``E[dX^* dY]`` with ``dX = X - E[X]``; an element of the algebra."""
    ce = ConditionalExpectation(alg, state, **kwargs)
    return ce(dag(ce.delta(x)) @ ce.delta(y))


def conditional_variance(x, alg: AlgebraSpec, state: QPState, **kwargs) -> np.ndarray:
    return conditional_covariance(x, x, alg, state, **kwargs)


# ---------------------------------------------------------------------------
# modular theory (finite-dimensional)
# ---------------------------------------------------------------------------

def _faithful_eig(state: QPState, eps=EPS_FAITHFUL):
    w, v = np.linalg.eigh(state.rho)
    if w.min() <= eps:
        raise NonFaithfulState(f"smallest eigenvalue {w.min():.3g} <= {eps:g}")
    return w, v


def modular_map(state: QPState, x, eps_faithful=EPS_FAITHFUL) -> np.ndarray:
    """``Delta X = rho X rho^{-1}``, so that ``<Y X^*> = <X^* Delta Y>``."""
    w, v = _faithful_eig(state, eps_faithful)
    _same_dim(x, state.rho)
    rho_inv = (v / w) @ dag(v)
    return state.rho @ x @ rho_inv


def modular_group(state: QPState, t: float, x, eps_faithful=EPS_FAITHFUL) -> np.ndarray:
    """``sigma_t(X) = rho^{it} X rho^{-it}``."""
    w, v = _faithful_eig(state, eps_faithful)
    _same_dim(x, state.rho)
    phase = np.exp(1j * t * np.log(w))
    u = (v * phase) @ dag(v)
    return u @ x @ dag(u)


DEFAULT_T_SAMPLES = (-3.0, -1.7, -1.0, -0.5, -0.1, 0.1, 0.5, 1.0, 1.7, 3.0)


def takesaki_check(state: QPState, alg: AlgebraSpec, t_samples=DEFAULT_T_SAMPLES,
                   tol=1e-10, eps_faithful=EPS_FAITHFUL) -> bool:
    """True iff every ``sigma_t(P_a)`` stays within ``tol`` of the algebra on the sampled ``t``."""
    return modular_invariance_residual(state, alg, t_samples, eps_faithful) <= tol


def modular_invariance_residual(state: QPState, alg: AlgebraSpec, t_samples=DEFAULT_T_SAMPLES,
                                eps_faithful=EPS_FAITHFUL) -> float:
    _faithful_eig(state, eps_faithful)
    worst = 0.0
    for t in t_samples:
        for p in alg.projections:
            worst = max(worst, alg.distance(modular_group(state, t, p, eps_faithful)))
    return worst


# ---------------------------------------------------------------------------
# random instances (tests and the acceptance driver share these)
# ---------------------------------------------------------------------------

@dataclass
class RandomInstance:
    dim: int
    alg: AlgebraSpec
    state: QPState
    rng: np.random.Generator = field(repr=False)

    def commutant_element(self) -> np.ndarray:
        return self.alg.compress(random_matrix(self.rng, self.dim))

    def algebra_element(self) -> np.ndarray:
        n = len(self.alg.projections)
        return self.alg.element(self.rng.normal(size=n) + 1j * self.rng.normal(size=n))


def random_matrix(rng, d) -> np.ndarray:
    return rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))


def random_unitary(rng, d) -> np.ndarray:
    q, r = np.linalg.qr(random_matrix(rng, d))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_hermitian(rng, d) -> np.ndarray:
    m = random_matrix(rng, d)
    return (m + dag(m)) / 2


def random_density(rng, d, floor=0.0) -> np.ndarray:
    g = random_matrix(rng, d)
    rho = g @ dag(g)
    rho = rho / np.trace(rho).real
    if floor:
        rho = (1 - floor * d) * rho + floor * np.eye(d)
    return (rho + dag(rho)) / 2


def random_algebra(rng, d, n_blocks=None) -> AlgebraSpec:
    """Random complete family: a random unitary basis cut into consecutive blocks."""
    if n_blocks is None:
        n_blocks = int(rng.integers(1, d + 1))
    cuts = np.sort(rng.choice(np.arange(1, d), size=n_blocks - 1, replace=False)) if n_blocks > 1 else []
    u = random_unitary(rng, d)
    bounds = [0, *cuts, d]
    projs = [u[:, a:b] @ dag(u[:, a:b]) for a, b in zip(bounds[:-1], bounds[1:])]
    return AlgebraSpec(tuple(projs))


def random_instance(seed: int, d=None) -> RandomInstance:
    rng = np.random.default_rng(seed)
    if d is None:
        d = int(rng.integers(2, 7))
    alg = random_algebra(rng, d, n_blocks=int(rng.integers(2, d + 1)))
    state = QPState(random_density(rng, d, floor=0.02 / d))
    return RandomInstance(d, alg, state, rng)


# ---------------------------------------------------------------------------
# axiom and identity residuals
# ---------------------------------------------------------------------------

def _probe(inst_rng, alg, d, domain):
    m = random_matrix(inst_rng, d)
    return alg.compress(m) if domain == "commutant" else m


def ce_axiom_residuals(alg: AlgebraSpec, state: QPState, rng, domain="commutant",
                       n_least_squares=50) -> dict:
    """Residuals of the conditional-expectation axioms on random probes.

    ``domain="commutant"`` draws test operators from the commutant of the
    projections and uses the checked map; ``domain="full"`` draws arbitrary
    matrices and applies the naive block formula.  Entries are nonnegative
    residuals except ``ce7p_n2``, ``ce7p_n3``, ``least_squares_gap`` and
    ``scalar_least_squares_gap``, which are minimum eigenvalues or gaps that must
    not be negative.
    """
    d = alg.dim
    ce = ConditionalExpectation(alg, state, require_commutant=(domain == "commutant"))
    probe = lambda: _probe(rng, alg, d, domain)
    n = len(alg.projections)
    alg_el = lambda: alg.element(rng.normal(size=n) + 1j * rng.normal(size=n))

    x, y, a = probe(), probe(), probe()
    al, be = complex(rng.normal(), rng.normal()), complex(rng.normal(), rng.normal())
    b1, b2 = alg_el(), alg_el()
    ea = ce(a)
    out = {
        "ce1": opnorm(ce(al * x + be * y) - al * ce(x) - be * ce(y)),
        "ce2": opnorm(ce(dag(a)) - dag(ea)),
        "ce3": opnorm(ce(np.eye(d)) - np.eye(d)),
        "ce4": abs(state.expect(ea) - state.expect(a)),
        "ce5": opnorm(ce(ea) - ea),
        "ce6": opnorm(ce(b1 @ a @ b2) - b1 @ ea @ b2),
    }
    for k in (2, 3):
        g = random_matrix(rng, k * d)
        big = g @ dag(g)
        blocks = [[big[i * d:(i + 1) * d, j * d:(j + 1) * d] for j in range(k)] for i in range(k)]
        if domain == "commutant":
            blocks = [[alg.compress(b) for b in row] for row in blocks]
        image = np.block([[ce(b) for b in row] for row in blocks])
        out[f"ce7p_n{k}"] = float(np.linalg.eigvalsh((image + dag(image)) / 2).min())

    xv = probe()
    ex = ce(xv)
    var_b = ce(dag(xv - ex) @ (xv - ex))
    ls_gap = np.inf
    scalar_gap = np.inf
    base = state.expect(dag(xv - ex) @ (xv - ex)).real
    for _ in range(n_least_squares):
        b = alg_el()
        r = xv - b
        diff = ce(dag(r) @ r) - var_b
        ls_gap = min(ls_gap, float(np.linalg.eigvalsh((diff + dag(diff)) / 2).min()))
        scalar_gap = min(scalar_gap, state.expect(dag(r) @ r).real - base)
    out["least_squares_gap"] = ls_gap
    b_opt = alg.element(alg.coefficients(ex))
    out["least_squares_equality"] = opnorm(ce(dag(xv - b_opt) @ (xv - b_opt)) - var_b)
    out["scalar_least_squares_gap"] = scalar_gap
    out["delta"] = max(opnorm(ce(ce.delta(a))), abs(state.expect(ce.delta(a))))
    lhs = abs(state.expect(dag(x) @ y)) ** 2
    rhs = state.expect(dag(x) @ x).real * state.expect(dag(y) @ y).real
    out["cauchy_schwarz"] = max(0.0, lhs - rhs)
    return out


def modular_identity_residual(state: QPState, rng, n_probes=5) -> float:
    """``max |<Y X^*> - <X^* Delta Y>|`` over random ``X, Y``."""
    d = state.dim
    worst = 0.0
    for _ in range(n_probes):
        x, y = random_matrix(rng, d), random_matrix(rng, d)
        worst = max(worst, abs(state.expect(y @ dag(x)) - state.expect(dag(x) @ modular_map(state, y))))
    return worst


def covariance_residuals(alg: AlgebraSpec, state: QPState, rng) -> dict:
    """Residuals of the covariance decomposition and the two conditional-covariance identities.

    * ``lemma``: ``Cov(X,Y) = <Cov_B(X,Y)> + <(E[X] - <X>)^*(E[Y] - <Y>)>``
    * ``cov_form``: ``Cov_B(X,Y) = E[X^*Y] - E[X]^* E[Y]``
    * ``cov_invariance``: ``Cov_B(X + B1, Y + B2) = Cov_B(X, Y)`` for ``B1, B2`` in the algebra
    """
    d = alg.dim
    n = len(alg.projections)
    ce = ConditionalExpectation(alg, state)
    x = alg.compress(random_matrix(rng, d))
    y = alg.compress(random_matrix(rng, d))
    b1 = alg.element(rng.normal(size=n) + 1j * rng.normal(size=n))
    b2 = alg.element(rng.normal(size=n) + 1j * rng.normal(size=n))
    cov_b = conditional_covariance(x, y, alg, state)
    one = np.eye(d)
    ex, ey = ce(x), ce(y)
    lemma = (state.expect(cov_b)
             + state.expect(dag(ex - state.expect(x) * one) @ (ey - state.expect(y) * one)))
    return {
        "lemma": abs(lemma - covariance(x, y, state)),
        "cov_form": opnorm(cov_b - (ce(dag(x) @ y) - dag(ex) @ ey)),
        "cov_invariance": opnorm(conditional_covariance(x + b1, y + b2, alg, state) - cov_b),
    }


def takesaki_pair():
    """Positive and negative qubit instances for the modular-invariance criterion.

    Both use ``rho = diag(0.3, 0.7)``; the positive case conditions on the
    computational basis, the negative one on the eigenbasis of Pauli X.
    """
    rho = QPState(np.diag([0.3, 0.7]).astype(complex))
    z_alg = AlgebraSpec.from_observable(PAULI_Z)
    x_alg = AlgebraSpec.from_observable(PAULI_X)
    return (rho, z_alg), (rho, x_alg)
