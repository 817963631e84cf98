import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("rvflow", deadline=None, max_examples=60)
settings.load_profile("rvflow")


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(12345))
