import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from tsvolterra.timescale import TimeScale  # noqa: E402


@pytest.fixture
def z10():
    return TimeScale.integers(0, 10)


@pytest.fixture
def z5():
    return TimeScale.integers(0, 5)


@pytest.fixture
def unit():
    return TimeScale.interval(0, 1)


@pytest.fixture
def mixed():
    return TimeScale.parse("[0,1];{2}")
