"""Collects the one-line acceptance verdicts and prints them at the end."""

_LINES = []


def pytest_runtest_logreport(report):
    if report.when != 'call':
        return
    for key, value in report.user_properties:
        if key == 'acceptance':
            _LINES.append(value)


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section('acceptance criteria')
    for line in sorted(_LINES):
        terminalreporter.write_line(line)
