import json
from pathlib import Path

import numpy as np
import pytest

DATA = Path(__file__).with_name("data")

# lines collected by the acceptance suite, echoed at the end of the run
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def oracles():
    return json.loads((DATA / "oracles.json").read_text())


def as_complex(pairs):
    return np.array([complex(a, b) for a, b in pairs])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
