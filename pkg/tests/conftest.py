"""Collects acceptance-criterion outcomes and prints one line per criterion."""

from collections import OrderedDict

import pytest

_results: "OrderedDict[str, dict]" = OrderedDict()


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    label = marker.args[0]
    entry = _results.setdefault(label, {"ok": True, "seen": False, "notes": []})
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        entry["seen"] = True
        if report.outcome != "passed":
            entry["ok"] = False
            entry["notes"].append(f"{item.name} failed")
        for key, value in item.user_properties:
            entry["notes"].append(f"{key}={value}")


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for label, entry in _results.items():
        status = "PASS" if entry["ok"] and entry["seen"] else "FAIL"
        notes = f"  [{'; '.join(entry['notes'])}]" if entry["notes"] else ""
        terminalreporter.write_line(f"{status}  {label}{notes}")
