import numpy as np
import pytest

from threewave import PhysParams, ground_state, reference_soliton, sobolev_constant, threshold_D


@pytest.fixture(scope="session")
def soliton():
    return reference_soliton()


@pytest.fixture(scope="session")
def c_sob():
    return sobolev_constant()


@pytest.fixture(scope="session")
def D1(soliton, c_sob):
    """Subcriticality threshold at alpha = 1."""
    return threshold_D(1.0, soliton.norm, c_sob)


@pytest.fixture(scope="session")
def ground_half(D1):
    """Ground state at alpha = 1, a1 = a2 = 0.5 D on the automatic grid."""
    a = 0.5 * D1
    return ground_state(PhysParams(1.0, a, a), tol=1e-10)


@pytest.fixture(scope="session")
def dyn_params(soliton, c_sob):
    """alpha = 370 at 0.5 D: natural length O(1), so T = 1 runs are not static."""
    alpha = 370.0
    a = 0.5 * threshold_D(alpha, soliton.norm, c_sob)
    return PhysParams(alpha, a, a)


@pytest.fixture(scope="session")
def dyn_ground(dyn_params):
    from threewave import RadialGrid

    return ground_state(dyn_params, RadialGrid(40.0, 1023), tol=1e-11)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
