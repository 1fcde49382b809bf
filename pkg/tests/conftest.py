"""Shared pytest hooks.

Acceptance checks register one line each in ``ACCEPTANCE_LINES``; the
lines are echoed in the terminal summary so they show without ``-s``.
"""

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
