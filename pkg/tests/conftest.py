import os
import re
import sys

from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

# exact arithmetic is slow on the first call of a cached property
settings.register_profile("conefan", deadline=None, max_examples=50)
settings.load_profile("conefan")

_CRITERION = re.compile(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)")


def pytest_terminal_summary(terminalreporter):
    rows = {}
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            m = _CRITERION.search(getattr(rep, "nodeid", ""))
            if m and rep.when in ("call", "setup"):
                rows[int(m.group(1))] = ("PASS" if outcome == "passed" else "FAIL", m.group(2))
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(rows):
        status, name = rows[n]
        terminalreporter.write_line(f"criterion {n}: {status} ({name.replace('_', ' ')})")
