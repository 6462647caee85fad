from contextlib import contextmanager

import pytest

_LINES = {}


@pytest.fixture
def criterion():
    """Context manager that records one pass/fail line per acceptance criterion."""

    @contextmanager
    def run(number, label):
        try:
            yield
        except AssertionError as exc:
            line = f"criterion {number:>2} FAIL  {label}: {str(exc).splitlines()[0]}"
            _LINES[number] = line
            print(line)
            raise
        line = f"criterion {number:>2} PASS  {label}"
        _LINES[number] = line
        print(line)

    return run


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(_LINES):
            terminalreporter.write_line(_LINES[key])
