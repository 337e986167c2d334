import numpy as np
import pytest
from hypothesis import settings

from fiolab.grid import make_grid

settings.register_profile("fiolab", max_examples=25, deadline=None)
settings.load_profile("fiolab")


@pytest.fixture(scope="session")
def grid1():
    return make_grid(1, 256, 16)


@pytest.fixture(scope="session")
def grid2():
    return make_grid(2, 64, 8)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
