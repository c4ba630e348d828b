import os
import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parents[1]
SRC = ROOT / "src"
if str(SRC) not in sys.path:
    sys.path.insert(0, str(SRC))
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from shared.types import TrainConfig


def pytest_collection_modifyitems(config, items):
    if os.getenv("MODIFY_SLOW") == "1":
        return
    skip = pytest.mark.skip(reason="slow; set MODIFY_SLOW=1 to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def tiny_config(tmp_path):
    return TrainConfig(epochs=2, batch=8, n_train=16, n_eval=8, k_targets=1, hidden=(8,), out_dir=str(tmp_path / "out"))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
