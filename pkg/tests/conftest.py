"""Shared fixtures and the acceptance result reporter.

The acceptance tests register one line per criterion; the summary hook
prints them after the run so the pass/fail status of each criterion is
visible regardless of capture settings.
"""

import numpy as np
import pytest

_ACCEPTANCE_LINES = {}


class AcceptanceRecorder:
    """Collects one PASS/FAIL line per acceptance criterion."""

    def check(self, number: int, name: str, ok: bool, detail: str):
        status = "PASS" if ok else "FAIL"
        line = f"ACCEPTANCE {number} {name}: {status} ({detail})"
        _ACCEPTANCE_LINES[number] = line
        print(line, flush=True)
        assert ok, line


@pytest.fixture(scope="session")
def acceptance():
    return AcceptanceRecorder()


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE_LINES):
        terminalreporter.write_line(_ACCEPTANCE_LINES[number])


@pytest.fixture
def rng():
    return np.random.default_rng(2024)
