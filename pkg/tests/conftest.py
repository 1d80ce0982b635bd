"""Shared fixtures."""

import pytest

from tresse.core.invariants import InvariantAlgebra, algebra
from tresse.models.config import TresseConfig


@pytest.fixture
def config() -> TresseConfig:
    return TresseConfig()


@pytest.fixture(scope="session")
def alg() -> InvariantAlgebra:
    return algebra()
