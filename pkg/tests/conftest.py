import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from illumkit.rng import CounterStream


@pytest.fixture
def rand_image():
    """Seeded random image factory: rand_image(h, w, lo=.., hi=.., seed=..)."""

    def make(height, width, lo=0.05, hi=0.95, seed=0, stream=0):
        return CounterStream(seed, stream).uniform(lo, hi, height, width, 3)

    return make


@pytest.fixture
def rand_vectors():
    """Seeded batches of strictly positive 3-vectors."""

    def make(n, lo=0.05, hi=1.0, seed=0):
        return CounterStream(seed).uniform(lo, hi, n, 3)

    return make
