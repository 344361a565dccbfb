import warnings

import numpy as np
import pytest

from netnewton.objective import from_quadratic_arrays, generate_quadratic_family
from netnewton.topology import build_regular_cycle, build_weights


def random_setup(rng, n=None, p=None, d=None):
    """Small random quadratic instance on a regular cycle (odd p allowed)."""
    n = n or int(rng.integers(3, 9))
    p = p or int(rng.integers(1, 4))
    if d is None:
        d = int(rng.choice([dd for dd in (2, 4) if dd < n]))
    a = 10.0 ** rng.integers(-1, 2, size=(n, p))
    b = rng.uniform(size=(n, p))
    inst = from_quadratic_arrays(a, b, seed=None)
    w = build_weights(build_regular_cycle(n, d))
    return inst, w


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def benchmark_setup():
    w = build_weights(build_regular_cycle(100, 4))
    return w, generate_quadratic_family(100, 4, 2, seed=0)


@pytest.fixture(autouse=True)
def _quiet_overflow():
    # divergence tests overflow on purpose
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        yield
