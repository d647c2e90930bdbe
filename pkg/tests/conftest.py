"""Shared test plumbing.

The acceptance tests record one human-readable line each; the terminal
summary hook prints them together at the end of the run so the outcome of
every end-to-end check is visible at a glance.
"""

import pytest

_lines = []


@pytest.fixture
def criterion():
    """Record a PASS/FAIL line with the measured numbers for one check."""

    def record(ok: bool, text: str):
        _lines.append(f"{'PASS' if ok else 'FAIL'}  {text}")

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _lines:
        terminalreporter.section("acceptance checks")
        for line in _lines:
            terminalreporter.write_line(line)
