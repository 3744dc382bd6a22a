import sys


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Replay the acceptance checklist after the run, one line per criterion."""
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "CHECKLIST", None) if module else None
    if lines:
        terminalreporter.section("acceptance checklist")
        for line in lines:
            terminalreporter.write_line(line)
