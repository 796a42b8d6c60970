import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.experiments import ExperimentConfig
from src.graphical import Diagram
from src.randomness import MarkKind, StreamKey

SPIKE = int(MarkKind.SPIKE)
LEAK = int(MarkKind.LEAK)


@pytest.fixture
def key():
    return StreamKey(master_seed=12345)


@pytest.fixture
def small_config():
    """Config small enough for unit tests."""
    return ExperimentConfig.from_dict({
        "seed": 7,
        "gamma": 0.5,
        "n": 3,
        "replicas": 20,
        "horizon": 5.0,
        "verify_diagrams": 25,
        "verify_n": 3,
        "verify_horizon": 2.0,
        "verify_gammas": [0.0, 0.5, 1.0],
        "oracle_max_sites": 5,
    })


@pytest.fixture
def toy_diagram():
    """
    Three sites, three events:
    spike at 0 (t=1), leak at 1 (t=2), spike at -1 (t=3).
    """
    return Diagram.from_events(-1, 1, 4.0, 0.5, [(0, 1.0, SPIKE), (1, 2.0, LEAK), (-1, 3.0, SPIKE)])
