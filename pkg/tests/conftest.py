"""Shared fixtures plus the acceptance gate summary.

Acceptance tests record one line per criterion through the ``gate``
fixture; the terminal summary prints them all so a run ends with an
explicit PASS/FAIL line for every criterion that executed.
"""

import pytest

_GATE: dict[int, tuple[str, str]] = {}


def record_criterion(num: int, title: str, passed: bool, detail: str = "") -> None:
    text = f"{title} | {detail}" if detail else title
    _GATE[num] = ("PASS" if passed else "FAIL", text)


@pytest.fixture(scope="session")
def gate():
    """Record-and-assert helper for acceptance criteria."""

    def check(num: int, title: str, passed, detail: str = ""):
        record_criterion(num, title, bool(passed), detail)
        assert passed, f"criterion {num}: {title} ({detail})"

    return check


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _GATE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_GATE):
        status, text = _GATE[num]
        terminalreporter.write_line(f"criterion {num:2d}: {status}  {text}")
