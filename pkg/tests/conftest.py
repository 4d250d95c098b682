import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from gbelab.jacobi import JacobiMatrix, sample_gbe, sample_iid
from gbelab.randsrc import RandomStream

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_jacobi(n, seed, kind="gbe", alpha=1.0):
    stream = RandomStream(seed, n)
    if kind == "gbe":
        return sample_gbe(n, 2.0 * alpha / n, stream)
    return sample_iid(n, alpha, stream)


@pytest.fixture
def two_by_two():
    return JacobiMatrix(np.zeros(2), np.ones(1))
