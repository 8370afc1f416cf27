import sys


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Print the acceptance criterion lines after the run, outside capture."""
    for name in ("tests.test_acceptance", "test_acceptance"):
        mod = sys.modules.get(name)
        if mod is not None and getattr(mod, "RESULTS", None):
            terminalreporter.write_sep("-", "acceptance criteria")
            for line in mod.RESULTS:
                terminalreporter.write_line(line)
            break
