import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

DATA = Path(__file__).parent / "data"

# acceptance outcomes collected for the terminal summary
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line for a criterion, then assert it."""

    def record(number: int, title: str, ok: bool, detail: str) -> None:
        ACCEPTANCE_LINES.append(f"criterion {number} {'PASS' if ok else 'FAIL'}: {title} ({detail})")
        assert ok, f"criterion {number} ({title}) failed: {detail}"

    return record


@pytest.fixture
def aucs_manifest():
    return DATA / "aucs" / "manifest.ini"


@pytest.fixture
def two_cliques():
    """Two disconnected 6-cliques."""
    a = np.zeros((12, 12))
    a[:6, :6] = 1
    a[6:, 6:] = 1
    np.fill_diagonal(a, 0)
    return a


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[1])):
            terminalreporter.write_line(line)
