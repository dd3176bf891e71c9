from __future__ import annotations

import pytest

_LINES: list = []


@pytest.fixture
def record_criterion():
    """Log one pass/fail line for an acceptance criterion."""

    def record(label: str, passed: bool, detail: str) -> bool:
        line = f"criterion {label}: {'PASS' if passed else 'FAIL'}  {detail}"
        _LINES.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
