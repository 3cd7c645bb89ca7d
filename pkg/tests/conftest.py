import re
from collections import OrderedDict

_CRITERION = re.compile(r"test_criterion_(\d+)_")
_results = OrderedDict()


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    entry = _results.setdefault(int(m.group(1)), {"ok": True, "seen": False, "details": []})
    if report.when == "call" or report.outcome != "passed":
        entry["seen"] = True
        if report.outcome != "passed":
            entry["ok"] = False
    if report.when != "call":
        return
    for key, value in report.user_properties:
        if key == "detail":
            entry["details"].append(value)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_results):
        entry = _results[n]
        status = "PASS" if entry["ok"] and entry["seen"] else "FAIL"
        details = "; ".join(entry["details"])
        tr.write_line(f"criterion {n}: {status}" + (f"  ({details})" if details else ""))
