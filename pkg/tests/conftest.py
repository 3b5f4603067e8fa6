from __future__ import annotations

import math
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from prcnet.config import config_from_dict  # noqa: E402

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"


def make_config(**overrides):
    """Six-agent sync reference config with top-level overrides."""
    d = {
        "n_agents": 6,
        "coupling": {"mode": "sync", "gain": 0.5},
        "method": {"kind": "optimized_spin"},
        "init": {"kind": "equally_spaced"},
        "t_end": 120.0,
    }
    d.update(overrides)
    return config_from_dict(d)


@pytest.fixture
def config_dir() -> Path:
    return CONFIG_DIR


PI = math.pi
