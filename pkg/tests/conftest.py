import numpy as np
import pytest

from cubfuzz.ratings import Edf, RatingSample, RatingScale

# worked example used across modules: 20 ratings on a 7-point scale
WORKED_FREQ = (1, 1, 2, 2, 6, 4, 4)
WORKED_F = (0.05, 0.10, 0.20, 0.30, 0.60, 0.80, 1.00)

# acceptance lines collected during the run, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def worked_sample():
    return RatingSample.from_freq(WORKED_FREQ)


@pytest.fixture
def worked_edf():
    return Edf(WORKED_F)


@pytest.fixture
def scale7():
    return RatingScale(7)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
