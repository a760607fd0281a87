import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from sgfem.constitutive import EngineeringMaterial, params_from_engineering

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def shear_params():
    """Unrounded moduli of the shear benchmark (E = 400, nu = 0.49, lc = 0.1)."""
    return params_from_engineering(EngineeringMaterial(400.0, 0.49, 0.1))


@pytest.fixture
def rng():
    return np.random.default_rng(20241015)
