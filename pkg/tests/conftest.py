import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from perfpred import BiasedCoinMap, ParameterSpace, squared_loss_affine


@pytest.fixture
def coin():
    return BiasedCoinMap(mu=0.3, eps=0.1)


@pytest.fixture
def unit_interval():
    return ParameterSpace.interval(0.0, 1.0)


@pytest.fixture
def affine_loss():
    return squared_loss_affine()
