from __future__ import annotations

import numpy as np
import pytest

import dsi
from util import SYNTH4


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def synth4() -> dsi.DatasetFeatures:
    return dsi.load_dataset(SYNTH4)
