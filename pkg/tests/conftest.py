import numpy as np
import pytest

from sarbackscatter.presets import desk_geometry, desk_radar


@pytest.fixture
def radar():
    return desk_radar()


@pytest.fixture
def geometry():
    return desk_geometry()


@pytest.fixture
def small_radar():
    """10 MHz chirp: short range windows for fast end-to-end runs."""
    return desk_radar(10e6, 10e-6)


def peak_index(image):
    return np.unravel_index(np.argmax(np.abs(image)), image.shape)


# One status line per acceptance criterion, printed after the test summary.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
