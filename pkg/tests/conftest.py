import sys


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    # surface the per-criterion verdict lines collected by the acceptance tests
    for name in ("test_acceptance", "tests.test_acceptance"):
        mod = sys.modules.get(name)
        if mod is not None and getattr(mod, "RESULT_LINES", None):
            terminalreporter.section("acceptance criteria")
            for line in mod.RESULT_LINES:
                terminalreporter.write_line(line)
            break
