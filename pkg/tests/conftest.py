import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

_ACCEPTANCE_LINES = {}


@pytest.fixture
def verdict():
    """Record the one-line pass/fail summary of an acceptance criterion."""

    def record(number: int, passed: bool, text: str) -> None:
        line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {text}"
        _ACCEPTANCE_LINES[number] = line
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_ACCEPTANCE_LINES):
        terminalreporter.write_line(_ACCEPTANCE_LINES[k])
