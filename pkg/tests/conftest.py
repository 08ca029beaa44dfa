import warnings

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from conftoda import oracle, pairspace

settings.register_profile("default", max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

MOBIUS = (0.3, 1.2, 0.24)


@pytest.fixture(scope="session")
def mobius():
    return oracle.mobius_pair(oracle.MobiusParams(*MOBIUS))


@pytest.fixture(scope="session")
def identity():
    return pairspace.identity_pair()


@pytest.fixture(scope="session")
def perturbed():
    return pairspace.pair_from_coefficients([1.0, 0.05, -0.01, 0.005], [1.0, 0.03, 0.04, -0.01])


@pytest.fixture(autouse=True)
def _quiet_tail_warnings():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        yield


def random_pair(seed: int, scale: float = 0.05, degree: int = 3):
    """A normalized non-Mobius pair with small random higher coefficients."""
    rng = np.random.default_rng(seed)
    c = lambda k: scale * (rng.normal(size=k) + 1j * rng.normal(size=k))  # noqa: E731
    a = np.concatenate([[1.0], c(degree) * 0.5 ** np.arange(degree)])
    b = np.concatenate([[1.0], c(degree) * 0.5 ** np.arange(degree)])
    return pairspace.pair_from_coefficients(a, b)
