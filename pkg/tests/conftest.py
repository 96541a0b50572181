"""Shared pytest configuration.

Collects the outcome of every test in test_acceptance.py and prints a
one-line PASS/FAIL verdict per gate at the end of the run so the
acceptance status is readable without scanning the full log.
"""

import sys
from pathlib import Path

# make `from helpers import ...` work regardless of invocation directory
sys.path.insert(0, str(Path(__file__).parent))

_verdicts = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call":
        _verdicts[name] = report.outcome
    elif report.when == "setup" and report.outcome != "passed":
        # collection/setup errors and skips still deserve a verdict line
        _verdicts[name] = report.outcome


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _verdicts:
        return
    terminalreporter.section("acceptance gates")
    for name in sorted(_verdicts):
        verdict = "PASS" if _verdicts[name] == "passed" else "FAIL"
        terminalreporter.write_line("%-58s %s" % (name, verdict))
