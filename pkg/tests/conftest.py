from . import acceptance_report


def pytest_terminal_summary(terminalreporter):
    if acceptance_report.lines:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_report.lines:
            terminalreporter.write_line(line)
