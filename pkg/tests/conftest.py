import numpy as np
import pytest


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running Monte Carlo checks")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def tv_distance(samples, pmf, lo=None, hi=None):
    """Total variation between the empirical law of integer samples and a pmf callable."""
    samples = np.asarray(samples)
    lo = samples.min() - 5 if lo is None else lo
    hi = samples.max() + 5 if hi is None else hi
    support = np.arange(lo, hi + 1)
    counts = np.bincount(samples - lo, minlength=support.size)[: support.size]
    exact = pmf(support)
    # exact mass outside the window counts fully towards the distance
    return 0.5 * (np.abs(counts / samples.size - exact).sum() + max(0.0, 1.0 - exact.sum()))
