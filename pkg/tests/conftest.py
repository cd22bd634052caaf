import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

# criterion id -> {"title": str, "ok": bool, "details": [str]}
_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(cid, title): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    cid, title = marker.args
    entry = _CRITERIA.setdefault(cid, {"title": title, "ok": True, "details": []})
    if report.failed:
        entry["ok"] = False
    if report.when == "call":
        entry["details"].extend(str(v) for k, v in report.user_properties if k == "detail")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_CRITERIA, key=lambda c: int(c[2:])):
        entry = _CRITERIA[cid]
        status = "PASS" if entry["ok"] else "FAIL"
        details = "; ".join(entry["details"])
        line = f"{cid:<5} {status}  {entry['title']}"
        terminalreporter.write_line(line + (f"  [{details}]" if details else ""))
