import time

import pytest

from ftguidance.scenario import SEC4_GUIDANCE, load_scenario
from ftguidance.simengine import run

# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture(scope="session")
def sec4():
    return load_scenario("paper-sec4")


@pytest.fixture(scope="session")
def params():
    return SEC4_GUIDANCE


@pytest.fixture(scope="session")
def sec4_timed(sec4):
    """Full delayed-mode run of the built-in scenario with its wall-clock time."""
    start = time.perf_counter()
    out = run(sec4.config(), sec4.agents)
    return out, time.perf_counter() - start


@pytest.fixture(scope="session")
def sec4_run(sec4_timed):
    return sec4_timed[0]


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
