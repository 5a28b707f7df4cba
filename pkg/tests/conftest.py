import re

import pytest

_LINES: dict[int, str] = {}
_NAME = re.compile(r"test_c(\d+)_")


@pytest.fixture
def criterion():
    """Record a one-line verdict for an acceptance criterion, then assert it."""

    def record(number: int, ok: bool, detail: str):
        _LINES[number] = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"
        assert ok, detail

    return record


def pytest_runtest_logreport(report):
    # a criterion test that crashed before recording still gets a line
    m = _NAME.search(report.nodeid)
    if m and report.when == "call" and report.failed and int(m.group(1)) not in _LINES:
        _LINES[int(m.group(1))] = f"[FAIL] criterion {m.group(1)}: {report.nodeid} raised before a verdict"


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(_LINES):
        terminalreporter.write_line(_LINES[number])
