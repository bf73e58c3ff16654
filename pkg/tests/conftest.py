import re
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_CRITERION = re.compile(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)")


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion."""
    seen = {}
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            m = _CRITERION.search(getattr(rep, "nodeid", ""))
            if m and rep.when in ("call", "setup"):
                key = int(m.group(1))
                if outcome != "passed" or key not in seen:
                    seen[key] = ("PASS" if outcome == "passed" else "FAIL", m.group(2),
                                 getattr(rep, "duration", 0.0))
    if not seen:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(seen):
        verdict, name, secs = seen[key]
        terminalreporter.write_line(f"criterion {key}: {verdict}  {name.replace('_', ' ')} ({secs:.1f}s)")
