import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from lsicert.instances import model_2d

settings.register_profile(
    "default",
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def model2d():
    return model_2d()


@pytest.fixture
def rng():
    return np.random.default_rng(20260819)
