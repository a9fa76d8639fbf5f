import functools

import numpy as np
import pytest

from sasaki_soliton.fields import sample_points
from sasaki_soliton.models import build_heisenberg

ACCEPTANCE_LINES: list[str] = []


@functools.lru_cache(maxsize=None)
def heisenberg(n: int):
    return build_heisenberg(n)


@pytest.fixture(params=[1, 2, 3], ids=lambda n: f"n={n}")
def model(request):
    return heisenberg(request.param)


@pytest.fixture
def h1():
    return heisenberg(1)


def points_for(structure, count=6, seed=0, box=None):
    return sample_points(structure.chart, count, seed, box)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
