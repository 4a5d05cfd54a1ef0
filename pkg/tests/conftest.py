import numpy as np
import pytest
from hypothesis import settings

from rboqe.learn.parametrization import UnitaryParams, to_unitary
from rboqe.oqe import OqeModel

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


def random_unitary(dim, rng):
    return to_unitary(UnitaryParams.random(dim, rng).angles, dim)


def random_model(chi, rng):
    return OqeModel(random_unitary(2 * chi, rng))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
