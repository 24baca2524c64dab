import numpy as np
import pytest
from hypothesis import settings

from hfrisk.rulesets import default_config

settings.register_profile("default", max_examples=200, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def fuzzy():
    return default_config()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
