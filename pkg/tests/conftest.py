import sys
import os

sys.path.insert(0, os.path.dirname(__file__))

_ACCEPTANCE_LINES = []


def record_criterion(number, description, passed, seconds):
    _ACCEPTANCE_LINES.append(
        f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  "
        f"[{seconds:6.1f}s]  {description}"
    )


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
