import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.absolute()))

from ucj_config import SimulationConfig, set_config  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(autouse=True)
def default_config():
    """Ogni test parte dalla configurazione di default"""
    previous = set_config(SimulationConfig())
    yield
    set_config(previous)
