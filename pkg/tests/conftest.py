import numpy as np
import pytest

from katobounds.geometry import (
    GridSpec,
    conformal_rho_exact,
    make_metric,
)
from katobounds.spectral import assemble_laplacian, eigendecompose

UNIT_L = (1.0, 1.0, 1.0)


@pytest.fixture(scope="session")
def grid8():
    return GridSpec(n=(8, 8, 8), L=UNIT_L)


@pytest.fixture(scope="session")
def grid12():
    return GridSpec(n=(12, 12, 12), L=UNIT_L)


@pytest.fixture(scope="session")
def flat_metric():
    return make_metric("flat", UNIT_L)


@pytest.fixture(scope="session")
def conf_metric():
    return make_metric("conformal", UNIT_L, eps=-0.05, sigma=0.2)


@pytest.fixture(scope="session")
def flat_lap8(flat_metric, grid8):
    return assemble_laplacian(flat_metric, grid8)


@pytest.fixture(scope="session")
def flat_dec8(flat_lap8):
    return eigendecompose(flat_lap8)


@pytest.fixture(scope="session")
def conf_lap8(conf_metric, grid8):
    return assemble_laplacian(conf_metric, grid8)


@pytest.fixture(scope="session")
def conf_dec8(conf_lap8):
    return eigendecompose(conf_lap8)


@pytest.fixture(scope="session")
def conf_rho8(conf_metric, grid8):
    return conformal_rho_exact(conf_metric, grid8.nodes())


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(12345)
