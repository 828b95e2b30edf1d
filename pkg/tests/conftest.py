import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def angdiff(a, b):
    """Smallest signed angle a - b."""
    return np.angle(np.exp(1j * (np.asarray(a) - np.asarray(b))))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
