def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Re-emit the acceptance pass/fail lines where they survive output capture."""
    import util

    if util.ACCEPTANCE_LINES:
        terminalreporter.section("acceptance summary")
        for line in util.ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
