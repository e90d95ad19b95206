from __future__ import annotations

import random

import pytest

from orgrisk import infer
from orgrisk.scenario import load_flood_scenario

from genmodels import random_model


@pytest.fixture(scope="session")
def flood_model():
    return load_flood_scenario()


@pytest.fixture(scope="session")
def flood_result(flood_model):
    return infer(flood_model)


@pytest.fixture(scope="session")
def small_corpus():
    """Sixty seeded random models for unit-level property checks."""
    return [random_model(random.Random(seed)) for seed in range(60)]
