import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from atomburgers.acceptance import reference_field
from atomburgers.forcing import ForcingField, ForcingPoint, RegenerationPoint

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def field_of(rows, window=(-5.0, 20.0)):
    return ForcingField(tuple(ForcingPoint(*r) for r in rows), window)


@pytest.fixture(scope="session")
def reference():
    return reference_field(0)


@pytest.fixture(scope="session")
def ref_field(reference):
    return reference[0]


@pytest.fixture(scope="session")
def ref_anchor(reference):
    return reference[1]


@pytest.fixture
def origin():
    # anchor at (0, 0) with no weight, for point-to-point problems
    return RegenerationPoint(0.0, 0.0, 0.0, 0.0)


def random_small_field(rng, n, window=(0.0, 3.0)):
    t = np.sort(rng.uniform(window[0] + 0.05, window[1] - 0.05, n))
    return ForcingField.from_arrays(t, rng.uniform(0, 1, n), rng.exponential(1.0, n), window)
