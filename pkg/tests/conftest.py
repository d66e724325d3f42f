import pytest

from acceptance_log import LINES


@pytest.hookimpl(trylast=True)
def pytest_terminal_summary(terminalreporter):
    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
