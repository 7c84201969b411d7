import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def assert_close(a, b, tol):
    err = np.max(np.abs(np.asarray(a) - np.asarray(b)))
    assert err <= tol, f"max abs error {err:.3g} > {tol:g}"
