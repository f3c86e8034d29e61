import numpy as np
import pytest

from qwalk.landscape import bundled_landscape, bundled_landscape_names


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=bundled_landscape_names())
def bundled(request):
    return bundled_landscape(request.param)


@pytest.fixture
def toy22():
    return bundled_landscape("toy_2x2")


ACCEPTANCE_LINES = {}


@pytest.fixture
def acceptance_report():
    """Record one summary line per acceptance criterion."""

    def report(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES[number] = line
        print(line)
        return ok

    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
