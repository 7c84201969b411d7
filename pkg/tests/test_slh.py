import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qfilterlab import ito, qp_core as q, slh
from qfilterlab.errors import DimensionMismatch
from qfilterlab.ito import Increment, ItoExpr
from conftest import assert_close

SM = q.SIGMA_MINUS


def _random_model(seed, d=3):
    r = np.random.default_rng(seed)
    S = slh.scattering_from_hermitian(q.random_hermitian(r, d))
    return slh.SLHModel(S, q.random_matrix(r, d), q.random_hermitian(r, d)), r


def test_validate():
    assert slh.validate(slh.SLHModel.emission(SM)).passed
    bad = slh.SLHModel(2 * np.eye(2), SM, np.zeros((2, 2)))
    assert not slh.validate(bad).passed
    with pytest.raises(DimensionMismatch):
        slh.SLHModel(np.eye(2), np.eye(3), np.eye(2))


def test_cayley_is_unitary(rng):
    assert q.is_unitary(slh.scattering_from_hermitian(q.random_hermitian(rng, 4)))


def test_decay_generator_examples():
    m = slh.SLHModel.emission(SM)
    n_exc = SM.conj().T @ SM  # projector onto the excited state
    assert_close(slh.lindblad_generator(m, n_exc), -n_exc, 1e-12)
    assert_close(slh.lindblad_generator(m, np.eye(2)), 0, 1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_generator_duality_and_unitality(seed):
    m, r = _random_model(seed)
    x = q.random_matrix(r, 3)
    rho = q.random_density(r, 3)
    assert_close(slh.lindblad_generator(m, np.eye(3)), 0, 1e-12)
    lhs = np.trace(rho @ slh.lindblad_generator(m, x))
    rhs = np.trace(slh.adjoint_generator(m, rho) @ x)
    assert abs(lhs - rhs) <= 1e-10
    assert abs(np.trace(slh.adjoint_generator(m, rho))) <= 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_dissipator_form(seed):
    m, r = _random_model(seed)
    x = q.random_hermitian(r, 3)
    c = q.commutator(m.L, x)
    assert_close(slh.dissipator_form(m, x), c.conj().T @ c, 1e-10)


def _symbolic_langevin():
    """``d(U* X U)`` at ``t = 0`` from ``dU = (S-1) dL + L dB* - L* S dB - K dt``."""
    S, L, K = ItoExpr.symbol("S"), ItoExpr.symbol("L"), ItoExpr.symbol("K")
    Ld = ItoExpr.symbol("L", dagger=True)
    du = (S - 1) * ito.dLambda() + L * ito.dB_dag() - Ld * S * ito.dB() - K * ito.dt()
    dud = du.adjoint()
    x = ItoExpr.symbol("X")
    return dud * x + x * du + dud * x * du


@pytest.mark.parametrize("seed", range(5))
def test_langevin_matches_ito_calculus(seed):
    m, r = _random_model(seed)
    x = q.random_hermitian(r, 3)
    K = 1j * m.H + 0.5 * m.L.conj().T @ m.L
    num = ito.evaluate_numeric(_symbolic_langevin(), {"S": m.S, "L": m.L, "K": K, "X": x})
    co = slh.langevin_coefficients(m, x)
    assert_close(num[Increment.DT], co.drift, 1e-10)
    assert_close(num[Increment.DB], co.dB_coeff, 1e-10)
    assert_close(num[Increment.DB_DAG], co.dB_dag_coeff, 1e-10)
    assert_close(num[Increment.DLAMBDA], co.dLambda_coeff, 1e-10)


def test_langevin_decay_example():
    co = slh.langevin_coefficients(slh.SLHModel.emission(SM), SM)
    assert_close(co.drift, -0.5 * SM, 1e-12)
    assert_close(co.dB_dag_coeff, 0, 1e-12)
    assert_close(co.dB_coeff, q.commutator(SM.conj().T, SM), 1e-12)
    assert_close(co.dLambda_coeff, 0, 1e-12)


def test_output_differential():
    m = slh.SLHModel.emission(SM)
    out = slh.output_differential(m)
    assert_close(out.dB_coeff, np.eye(2), 0)
    assert_close(out.homodyne_drift(), SM + SM.conj().T, 0)


def test_wiener_and_poisson_generators(rng):
    h, r = q.random_hermitian(rng, 3), q.random_hermitian(rng, 3)
    x = q.random_matrix(rng, 3)
    model = slh.wiener_driven_model(h, r)
    assert_close(slh.lindblad_generator(model, x), slh.wiener_driven_generator(h, r, x), 1e-10)
    s = q.random_unitary(rng, 3)
    assert_close(slh.poisson_kick_generator(s, np.eye(3)), 0, 1e-12)
    assert_close(slh.poisson_kick_generator(s, x), s.conj().T @ x @ s - x, 0)


def test_spec_examples_validate_and_generators():
    assert slh.validate(slh.SLHModel(np.eye(2), np.zeros((2, 2)), q.PAULI_Z)).passed
    rep = slh.validate(slh.SLHModel(np.diag([1.0, math.sqrt(1.1)]), np.zeros((2, 2)), np.zeros((2, 2))))
    assert not rep.passed and rep.unitarity_residual == pytest.approx(0.1, abs=1e-12)
    r = np.random.default_rng(1)
    h, x = q.random_hermitian(r, 3), q.random_matrix(r, 3)
    closed = slh.SLHModel(np.eye(3), np.zeros((3, 3)), h)
    assert_close(slh.lindblad_generator(closed, x), -1j * q.commutator(x, h), 1e-14)


def test_adjoint_generator_examples():
    g = 2.0
    m = slh.SLHModel.emission(math.sqrt(g) * SM)
    e, gr = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
    assert_close(slh.adjoint_generator(m, e), g * (gr - e), 1e-14)
    z = slh.SLHModel(np.eye(2), np.zeros((2, 2)), q.PAULI_Z)
    assert_close(slh.adjoint_generator(z, np.diag([0.3, 0.7])), 0, 0)


def test_langevin_special_cases(rng):
    m, r = _random_model(4)
    one = slh.SLHModel(np.eye(3), m.L, m.H)
    co = slh.langevin_coefficients(one, np.eye(3))
    for a in (co.drift, co.dB_coeff, co.dB_dag_coeff, co.dLambda_coeff):
        assert_close(a, 0, 1e-14)
    x = q.random_hermitian(r, 3)
    assert_close(slh.langevin_coefficients(one, x).dB_dag_coeff, q.commutator(x, m.L), 1e-14)
    s = q.random_unitary(r, 3)
    co = slh.langevin_coefficients(slh.SLHModel(s, np.zeros((3, 3)), np.zeros((3, 3))), x)
    assert_close(co.drift, 0, 0)
    assert_close(co.dB_coeff, 0, 0)
    assert_close(co.dB_dag_coeff, 0, 0)
    assert_close(co.dLambda_coeff, s.conj().T @ x @ s - x, 1e-14)


def test_output_without_coupling_is_input():
    out = slh.output_differential(slh.SLHModel.emission(np.zeros((2, 2))))
    assert_close(out.dt_coeff, 0, 0)
    assert_close(out.dB_coeff, np.eye(2), 0)
