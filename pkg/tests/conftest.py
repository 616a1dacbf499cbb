import os
import random
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))


@pytest.fixture
def rng():
    return random.Random(int(os.environ.get("SYSTOLE_LAB_SEED", "0")))
