"""Test-session hooks.

Prints one PASS/FAIL line per acceptance criterion at the end of the run so
the gate status is readable without scrolling through the full log.
"""

from __future__ import annotations

import re

_CRITERION = re.compile(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    seen: dict[int, tuple[str, str]] = {}
    for outcome, label in (("passed", "PASS"), ("failed", "FAIL"), ("error", "FAIL")):
        for rep in terminalreporter.stats.get(outcome, []):
            m = _CRITERION.search(getattr(rep, "nodeid", ""))
            if m is None:
                continue
            if getattr(rep, "when", "call") not in ("call", "setup"):
                continue
            num = int(m.group(1))
            name = m.group(2).replace("_", " ")
            # a failed setup and a failed call both count as FAIL; never let
            # a later PASS overwrite an earlier FAIL for the same criterion
            if num in seen and seen[num][0] == "FAIL":
                continue
            seen[num] = (label, name)
    if not seen:
        return
    tw = terminalreporter
    tw.write_sep("-", "acceptance criteria")
    for num in sorted(seen):
        label, name = seen[num]
        tw.write_line(f"criterion {num:02d} {name:<52s} {label}")
