import pytest

from compressible_bl.core import FlowParams

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def unit_params():
    """2 i0 = 1, c = 1, delta = 0.5: the CLI defaults."""
    return FlowParams(U=0.1, i0=0.5, c=1.0, delta=0.5)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
