import numpy as np
import pytest

from fncreg.model import Dataset


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_dataset(rng, n, p, s=3, noise=0.5):
    x = rng.standard_normal((n, p))
    beta = np.zeros(p)
    beta[: min(s, p)] = rng.choice([-1.0, 1.0], size=min(s, p)) * rng.uniform(0.5, 2.0, size=min(s, p))
    y = x @ beta + noise * rng.standard_normal(n)
    return Dataset(x, y)


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running Monte-Carlo checks")
