import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qfilterlab import qp_core as q
from qfilterlab.errors import (
    DegenerateBlock,
    DimensionMismatch,
    IncompatibleObservable,
    NonFaithfulState,
    NotHermitian,
    ZeroProbabilityOutcome,
)
from conftest import assert_close

X, Y, Z = q.PAULI_X, q.PAULI_Y, q.PAULI_Z
I2 = np.eye(2)


# -- predicates and states ----------------------------------------------------

def test_predicates():
    assert q.is_hermitian(X) and not q.is_hermitian(q.SIGMA_MINUS)
    assert q.is_unitary(Y)
    assert q.is_projection((I2 + Z) / 2) and not q.is_projection(Z)


def test_normalize_and_density():
    psi = q.normalize([3, 4])
    assert np.linalg.norm(psi) == pytest.approx(1, abs=1e-12)
    rho = q.pure_density(psi)
    assert np.trace(rho).real == pytest.approx(1, abs=1e-12)
    with pytest.raises(ValueError):
        q.as_density_matrix(np.diag([0.5, 0.6]))


def test_state_expectation():
    st_ = q.QPState.tracial(2)
    assert st_.expect(I2) == pytest.approx(1)
    assert st_.expect(Z) == pytest.approx(0)


# -- spectral theory and measurement ---------------------------------------

def test_spectral_diagonal_clusters():
    sd = q.spectral_decompose(np.diag([1.0, 1.0, 2.0]), cluster_tol=1e-8)
    assert_close(sd.eigenvalues, [1, 2], 1e-12)
    assert [round(np.trace(p).real) for p in sd.projections] == [2, 1]


def test_spectral_pauli_x():
    sd = q.spectral_decompose(X)
    assert_close(sd.eigenvalues, [-1, 1], 1e-12)
    assert_close(sd.projections[0], (I2 - X) / 2, 1e-12)
    assert_close(sd.projections[1], (I2 + X) / 2, 1e-12)


def test_spectral_identity():
    sd = q.spectral_decompose(np.eye(3))
    assert len(sd.projections) == 1
    assert_close(sd.projections[0], np.eye(3), 1e-12)


def test_spectral_rejects_nonhermitian():
    with pytest.raises(NotHermitian):
        q.spectral_decompose(q.SIGMA_MINUS)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 6))
def test_spectral_invariants(seed, d):
    a = q.random_hermitian(np.random.default_rng(seed), d)
    sd = q.spectral_decompose(a)
    assert_close(sum(sd.projections), np.eye(d), 1e-10)
    assert_close(sd.reconstruct(), a, 1e-10)
    for i, p in enumerate(sd.projections):
        for r in sd.projections[i + 1:]:
            assert q.opnorm(p @ r) <= 1e-10
    assert np.all(np.diff(sd.eigenvalues) > 0)


def test_born_probabilities():
    sdz = q.spectral_decompose(Z)
    p = q.born_probabilities(sdz, np.array([1, 1]) / np.sqrt(2))
    assert p[1.0] == pytest.approx(0.5) and p[-1.0] == pytest.approx(0.5)
    p = q.born_probabilities(sdz, [1, 0])
    assert p[1.0] == pytest.approx(1) and p[-1.0] == pytest.approx(0)
    # |<a|psi>|^2 by hand: Z eigenvector +1 is |0>
    p = q.born_probabilities(sdz, [0.6, 0.8])
    assert p[1.0] == pytest.approx(0.36, abs=1e-12)
    assert p[-1.0] == pytest.approx(0.64, abs=1e-12)
    with pytest.raises(DimensionMismatch):
        q.born_probabilities(sdz, [1, 0, 0])


def test_project_postulate():
    p0 = np.diag([1, 0]).astype(complex)
    assert_close(q.project_postulate([1, 0], p0), [1, 0], 1e-12)
    assert_close(q.project_postulate(np.array([1, 1]) / np.sqrt(2), p0), [1, 0], 1e-12)
    with pytest.raises(ZeroProbabilityOutcome):
        q.project_postulate([0, 1], p0)


def test_compatible():
    assert q.compatible(Z, Z @ Z)
    assert not q.compatible(X, Z)
    assert q.compatible(np.kron(Z, I2), np.kron(I2, X))
    with pytest.raises(DimensionMismatch):
        q.compatible(Z, np.eye(3))


def test_projection_commute_lemma_constructed(rng):
    u = q.random_unitary(rng, 3)
    p = np.outer(u[:, 0], u[:, 0].conj())
    inside = p.copy()                                   # Q <= P
    orth = np.outer(u[:, 1], u[:, 1].conj())            # Q orthogonal to P
    for qq in (inside, orth):
        assert q.opnorm(p @ qq @ p - qq @ p) <= 1e-10
        assert q.check_projection_commute_lemma(p, qq)
    generic = np.outer(*(2 * [q.normalize(u[:, 0] + u[:, 1])]))
    generic = np.outer(q.normalize(u[:, 0] + u[:, 1]), q.normalize(u[:, 0] + u[:, 1]).conj())
    assert q.check_projection_commute_lemma(p, generic)


# -- conditional expectation -------------------------------------------------

def test_ce_identity_on_algebra(rng):
    inst = q.random_instance(3)
    b = inst.algebra_element()
    assert_close(q.conditional_expectation(b, inst.alg, inst.state), b, 1e-10)
    assert_close(q.conditional_expectation(np.eye(inst.dim), inst.alg, inst.state), np.eye(inst.dim), 1e-12)


def test_ce_product_state_by_hand(rng):
    r1 = q.random_density(rng, 2)
    r2 = q.random_density(rng, 2)
    state = q.QPState(np.kron(r1, r2))
    alg = q.AlgebraSpec.from_observable(np.kron(Z, I2))
    a = np.kron(I2, X)
    expected = np.trace(r2 @ X) * np.eye(4)
    assert_close(q.conditional_expectation(a, alg, state), expected, 1e-12)


def test_ce_rejects_noncommuting():
    alg = q.AlgebraSpec.from_observable(Z)
    with pytest.raises(IncompatibleObservable):
        q.conditional_expectation(X, alg, q.QPState.tracial(2))


def test_ce_drops_zero_blocks():
    alg = q.AlgebraSpec.from_observable(Z)
    state = q.QPState(np.diag([1.0, 0.0]).astype(complex))
    ce = q.ConditionalExpectation(alg, state)
    assert ce.dropped == (0,)  # eigenvalue -1 block (|1>) has probability 0
    assert_close(ce(Z), np.diag([1, 0]), 1e-12)
    with pytest.raises(DegenerateBlock):
        q.ConditionalExpectation(alg, state, strict=True)


@pytest.mark.parametrize("seed", range(20))
def test_ce_axioms_random(seed):
    inst = q.random_instance(seed)
    r = q.ce_axiom_residuals(inst.alg, inst.state, inst.rng)
    for key in ("ce1", "ce2", "ce3", "ce4", "ce5", "ce6", "delta", "least_squares_equality", "cauchy_schwarz"):
        assert r[key] <= 1e-10, key
    for key in ("ce7p_n2", "ce7p_n3", "least_squares_gap", "scalar_least_squares_gap"):
        assert r[key] >= -1e-10, key


# -- covariance --------------------------------------------------------------

def test_covariance_examples():
    mixed = q.QPState.tracial(2)
    assert q.covariance(I2, I2, mixed) == pytest.approx(0)
    assert q.covariance(Z, Z, mixed) == pytest.approx(1)
    assert q.covariance(Z, I2, mixed) == pytest.approx(0)


def test_conditional_covariance_algebra_elements():
    inst = q.random_instance(5)
    b1, b2 = inst.algebra_element(), inst.algebra_element()
    assert_close(q.conditional_covariance(b1, b2, inst.alg, inst.state), 0, 1e-10)


def test_cov_invariance_shift_by_projection():
    inst = q.random_instance(8)
    x = inst.commutant_element()
    p0 = inst.alg.projections[0]
    lhs = q.conditional_covariance(x + p0, x + p0, inst.alg, inst.state)
    assert_close(lhs, q.conditional_variance(x, inst.alg, inst.state), 1e-12)


@pytest.mark.parametrize("seed", range(10))
def test_covariance_identities(seed):
    inst = q.random_instance(100 + seed, d=3)
    r = q.covariance_residuals(inst.alg, inst.state, inst.rng)
    assert max(r.values()) <= 1e-12


# -- modular theory ----------------------------------------------------------

def test_modular_tracial_and_fixed_point(rng):
    x = q.random_matrix(rng, 3)
    assert_close(q.modular_map(q.QPState.tracial(3), x), x, 1e-12)
    rho = q.random_density(rng, 3, floor=0.05)
    assert_close(q.modular_map(q.QPState(rho), rho), rho, 1e-10)


def test_modular_qubit_ratio():
    p = 0.3
    state = q.QPState(np.diag([p, 1 - p]).astype(complex))
    e01 = np.array([[0, 1], [0, 0]], dtype=complex)
    assert_close(q.modular_map(state, e01), (p / (1 - p)) * e01, 1e-12)
    t = 0.7
    assert_close(q.modular_group(state, t, e01), (p / (1 - p)) ** (1j * t) * e01, 1e-12)


def test_modular_group_properties(rng):
    state = q.QPState(q.random_density(rng, 3, floor=0.05))
    x = q.random_matrix(rng, 3)
    assert_close(q.modular_group(state, 0.0, x), x, 1e-12)
    comp = q.modular_group(state, 0.4, q.modular_group(state, 1.1, x))
    assert_close(comp, q.modular_group(state, 1.5, x), 1e-10)
    assert_close(q.modular_group(q.QPState.tracial(3), 2.0, x), x, 1e-12)
    assert q.modular_identity_residual(state, rng) <= 1e-10


def test_nonfaithful_rejected():
    with pytest.raises(NonFaithfulState):
        q.modular_map(q.QPState(np.diag([1.0, 0.0]).astype(complex)), X)


def test_takesaki_examples(rng):
    (pos, pa), (neg, na) = q.takesaki_pair()
    assert q.takesaki_check(pos, pa)
    assert not q.takesaki_check(neg, na)
    assert q.takesaki_check(neg, q.AlgebraSpec.trivial(2))
    rho = q.random_density(rng, 3, floor=0.05)
    alg = q.AlgebraSpec.from_observable(rho)     # commutes with rho
    assert q.takesaki_check(q.QPState(rho), alg)


def test_takesaki_negative_breaks_block_formula():
    (_, _), (neg, na) = q.takesaki_pair()
    r = q.ce_axiom_residuals(na, neg, np.random.default_rng(0), domain="full")
    assert max(r["ce2"], r["ce6"]) >= 1e-3


def test_random_instance_shapes():
    for seed in range(30):
        inst = q.random_instance(seed)
        assert 2 <= inst.dim <= 6
        assert len(inst.alg.projections) >= 2
        assert np.linalg.eigvalsh(inst.state.rho).min() > 0


def test_projection_commute_lemma_diagonal():
    p = np.diag([1, 1, 0]).astype(complex)
    qq = np.diag([0, 1, 1]).astype(complex)
    assert q.check_projection_commute_lemma(p, qq)


def test_project_postulate_in_range_unchanged():
    p = np.diag([1, 1, 0]).astype(complex)
    psi = q.normalize([0.6, 0.8j, 0])
    assert_close(q.project_postulate(psi, p), psi, 1e-15)
