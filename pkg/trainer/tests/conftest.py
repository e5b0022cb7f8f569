import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from _synth_helpers import synth_dataset


@pytest.fixture(scope="session")
def small_dataset(tmp_path_factory) -> Path:
    return synth_dataset(tmp_path_factory.mktemp("data") / "ds", count=16, seed=99)
