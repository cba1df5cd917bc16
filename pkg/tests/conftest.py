import re

ACCEPTANCE = re.compile(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)")


def pytest_terminal_summary(terminalreporter):
    seen = {}
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            m = ACCEPTANCE.search(getattr(rep, "nodeid", ""))
            if not m or getattr(rep, "when", "call") not in ("call", "setup"):
                continue
            key = int(m.group(1))
            ok = outcome == "passed"
            # a setup error or call failure wins over a passed phase
            if key not in seen or not ok:
                seen[key] = (ok, m.group(2))
    if not seen:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(seen):
        ok, name = seen[key]
        terminalreporter.write_line(
            f"criterion {key:2d}: {'PASS' if ok else 'FAIL'}  {name.replace('_', ' ')}")
