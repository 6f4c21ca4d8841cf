from __future__ import annotations

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_criteria: list[str] = []


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    props = dict(report.user_properties)
    if "criterion" in props:
        status = "PASS" if report.passed else "FAIL"
        _criteria.append(f"{status}  criterion {props['criterion']}: {props.get('title', '')}"
                         f"  ({report.duration:.2f} s)")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(_criteria, key=lambda s: int(s.split()[2].rstrip(":"))):
        terminalreporter.write_line(line)
