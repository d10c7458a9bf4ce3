import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from horolab.manifolds import HomogeneousModel
from horolab.models import make_constant_diag_profile, make_sinusoidal_profile

settings.register_profile(
    "horolab", max_examples=20, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("horolab")


@pytest.fixture
def h2():
    return make_constant_diag_profile([-1.0])


@pytest.fixture
def flat():
    return make_constant_diag_profile([0.0])


@pytest.fixture
def quat():
    return make_constant_diag_profile([-4.0, -1.0, -1.0])


@pytest.fixture
def kappa():
    """kappa(t) = -2 - sin t."""
    return make_sinusoidal_profile(-2.0, -1.0)


@pytest.fixture
def h2_model():
    return HomogeneousModel(make_constant_diag_profile([-1.0]), "H2")


@pytest.fixture
def flat_model():
    return HomogeneousModel(make_constant_diag_profile([0.0]), "flat")


@pytest.fixture
def quat_model():
    return HomogeneousModel(make_constant_diag_profile([-4.0, -1.0, -1.0]), "quat")


def coth(x):
    return 1.0 / math.tanh(x)


def scalar(M):
    return float(np.asarray(M).reshape(-1)[0])
