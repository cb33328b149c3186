import numpy as np
import pytest

from irsec.channel import SystemConfig, generate_channels


@pytest.fixture(scope="session")
def desk_config():
    return SystemConfig.desk_scale()


@pytest.fixture(scope="session")
def desk_channels(desk_config):
    return generate_channels(desk_config, 7)


@pytest.fixture(scope="session")
def tiny_config():
    # Small enough for exhaustive enumeration, same geometry.
    return SystemConfig.desk_scale(m=4, n_i=3, n_b=2, n_e=2)


@pytest.fixture(scope="session")
def tiny_channels(tiny_config):
    return generate_channels(tiny_config, 5)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_unit(rng, n):
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def random_phases(rng, n):
    return np.exp(2j * np.pi * rng.random(n))
