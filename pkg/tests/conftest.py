import numpy as np
import pytest

import rismimo as rm


@pytest.fixture
def small_config():
    """A desk-scale scenario for fast structural tests."""
    return rm.make_config(M=8, N=8, K=2, k_k=[10.0, 3.0], seed=11)


@pytest.fixture
def small_scene(small_config):
    gains, users = rm.build_scene(small_config)
    return small_config, gains, users


def random_phases(n, seed=0):
    return rm.PhaseVector.continuous(rm.substream(seed, "test-phases").uniform(0, 2 * np.pi, n))
