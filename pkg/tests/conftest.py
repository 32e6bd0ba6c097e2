"""Echo acceptance-criterion verdicts after the run, outside output capture."""


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    import helpers

    if helpers.VERDICT_LINES:
        terminalreporter.section("acceptance criteria")
        for line in helpers.VERDICT_LINES:
            terminalreporter.write_line(line)
