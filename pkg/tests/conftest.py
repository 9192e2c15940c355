"""Shared fixtures for the TopoHopf test suite."""

import numpy as np
import pytest

from dynamics.systemzoo import make_system
from models.arch import ArchConfig, TrainOpts
from models.field import GridSpec
from models.system import SystemName


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_arch():
    """Two conv blocks on 16x16 inputs; both blocks get attention."""
    return ArchConfig(channels=(4, 8), input_size=16, mlp_hidden=8, latent_dim=4, dropout=0.5)


@pytest.fixture
def tiny_opts():
    return TrainOpts(lr=5e-3, epochs=3, batch_size=16, seed=3, runs=1, val_fraction=0.1)


@pytest.fixture
def so_grid():
    return GridSpec(16, 16, ((-1.0, 1.0), (-1.0, 1.0)))


@pytest.fixture
def so_point():
    return make_system(SystemName.SO, (-0.3, 0.8))


@pytest.fixture
def so_cycle():
    return make_system(SystemName.SO, (0.3, 0.8))
