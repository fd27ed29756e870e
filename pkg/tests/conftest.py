import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from isobinom.model import validate_sample  # noqa: E402

MALFORMATION = [(17114, 48), (14502, 38), (793, 5), (165, 2)]


@pytest.fixture
def malformation():
    return validate_sample(MALFORMATION)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


@pytest.fixture
def verdict():
    def record(number, ok, detail, gating=True):
        tag = "PASS" if ok else "FAIL"
        suffix = "" if gating else " (informative)"
        line = f"[{tag}] criterion {number}{suffix}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
