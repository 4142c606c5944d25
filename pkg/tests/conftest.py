from __future__ import annotations

import time

import pytest

#: lines collected by the acceptance tests, printed in the terminal summary
ACCEPTANCE_LINES: list[str] = []

#: wall-clock budget for the whole test session, in seconds
SUITE_BUDGET = 60.0

_START = time.perf_counter()


@pytest.fixture
def report():
    """``report(label, ok, detail)`` records a PASS/FAIL line and fails the
    test when ``ok`` is false."""

    def _report(label: str, ok: bool, detail: str) -> None:
        line = f"{label}: {'PASS' if ok else 'FAIL'} ({detail})"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return _report


def pytest_terminal_summary(terminalreporter, exitstatus, config) -> None:
    if not ACCEPTANCE_LINES:
        return
    elapsed = time.perf_counter() - _START
    tr = terminalreporter
    tr.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        tr.write_line(line)
    ok = elapsed < SUITE_BUDGET
    tr.write_line(f"full suite runtime: {'PASS' if ok else 'FAIL'} "
                  f"({elapsed:.1f} s, budget {SUITE_BUDGET:.0f} s)")
