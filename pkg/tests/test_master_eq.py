import numpy as np
import pytest

from qfilterlab import master_eq as me, qp_core as q, slh
from qfilterlab.errors import NonHermitianObservable, PositivityViolation, StepTooLarge

SM = q.SIGMA_MINUS
EXCITED = np.diag([1.0, 0.0]).astype(complex)


def test_decay_matches_exponential():
    sol = me.propagate(slh.SLHModel.emission(SM), EXCITED, 3.0, 0.01)
    curve = me.expectation_curve(sol, EXCITED)
    np.testing.assert_allclose(curve[:, 1], np.exp(-curve[:, 0]), atol=1e-9)


def test_coherence_decays_at_half_rate():
    plus = q.pure_density(np.array([1, 1]) / np.sqrt(2))
    sol = me.propagate(slh.SLHModel.emission(SM), plus, 2.0, 0.01)
    np.testing.assert_allclose(np.abs(sol.states[:, 0, 1]), 0.5 * np.exp(-sol.times / 2), atol=1e-9)


def test_store_every_and_csv():
    sol = me.propagate(slh.SLHModel.emission(SM), EXCITED, 1.0, 0.01, store_every=10)
    assert len(sol) == 11
    rows = list(me.csv_rows(sol))
    assert len(me.csv_header(2)) == len(rows[0]) == 9
    assert rows[0][:2] == [0.0, 1.0]


def test_trace_and_hermiticity_preserved(rng):
    H = q.random_hermitian(rng, 3)
    L = q.random_matrix(rng, 3)
    sol = me.propagate(slh.SLHModel(np.eye(3), L, H), q.random_density(rng, 3), 1.0, 0.005)
    tr = np.einsum("tii->t", sol.states)
    np.testing.assert_allclose(tr, 1.0, atol=1e-10)
    np.testing.assert_allclose(sol.states, np.conj(np.swapaxes(sol.states, 1, 2)), atol=1e-12)


def test_guards():
    model = slh.SLHModel.emission(3 * SM)
    with pytest.raises((StepTooLarge, PositivityViolation)):
        me.propagate(model, EXCITED, 5.0, 0.5)
    negated = lambda m, r: -slh.adjoint_generator(m, r)  # noqa: E731
    with pytest.raises(PositivityViolation):
        me.propagate(slh.SLHModel.emission(SM), 0.5 * np.eye(2) + 0.2 * q.PAULI_Z, 1.0, 0.01,
                     generator=negated)
    sol = me.propagate(slh.SLHModel.emission(SM), EXCITED, 1.0, 0.01, generator=negated, guards=False)
    assert sol.final()[0, 0].real > 1.0


def test_bad_arguments():
    m = slh.SLHModel.emission(SM)
    with pytest.raises(ValueError):
        me.propagate(m, EXCITED, 1.0, 0.3)
    with pytest.raises(ValueError):
        me.propagate(m, EXCITED, 1.0, -0.1)
    with pytest.raises(NonHermitianObservable):
        me.expectation_curve(me.propagate(m, EXCITED, 0.1, 0.1), SM)


def test_spec_examples():
    static = me.propagate(slh.SLHModel.emission(np.zeros((2, 2))), 0.5 * np.eye(2) + 0.1 * q.PAULI_X, 1.0, 0.1)
    assert np.abs(static.states - static.states[0]).max() == 0.0
    decay = me.propagate(slh.SLHModel.emission(SM), EXCITED, 1.0, 1e-4, store_every=10_000)
    assert decay.final()[0, 0].real == pytest.approx(np.exp(-1.0), abs=1e-8)
    w = 3.0
    plus = q.pure_density(np.array([1, 1]) / np.sqrt(2))
    rot = me.propagate(slh.SLHModel(np.eye(2), np.zeros((2, 2)), 0.5 * w * q.PAULI_Z), plus, 1.0, 1e-3)
    np.testing.assert_allclose(rot.states[:, 0, 1], 0.5 * np.exp(-1j * w * rot.times), atol=1e-9)
    np.testing.assert_allclose(rot.states[:, 0, 0].real, 0.5, atol=1e-12)


def test_expectation_curve_examples():
    sol = me.propagate(slh.SLHModel.emission(SM), EXCITED, 1.0, 0.01)
    np.testing.assert_allclose(me.expectation_curve(sol, np.eye(2))[:, 1], 1.0, atol=1e-12)
    mixed = me.propagate(slh.SLHModel.emission(np.zeros((2, 2)), q.PAULI_X), 0.5 * np.eye(2), 1.0, 0.01)
    np.testing.assert_allclose(me.expectation_curve(mixed, q.PAULI_Z)[:, 1], 0.0, atol=1e-15)
