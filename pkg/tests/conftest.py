"""Collects acceptance outcomes and prints one line per criterion at the end of the run."""

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_results = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number n")


def pytest_runtest_makereport(item, call):
    m = item.get_closest_marker("criterion")
    if m is None:
        return
    n, title = m.args
    entry = _results.setdefault(n, {"title": title, "status": "PASS", "why": ""})
    if call.excinfo is None:
        return
    if call.excinfo.errisinstance(pytest.skip.Exception):
        if entry["status"] == "PASS":
            entry["status"], entry["why"] = "SKIP", str(call.excinfo.value)
    else:
        entry["status"] = "FAIL"
        entry["why"] = call.excinfo.exconly().splitlines()[0][:160]


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_results):
        r = _results[n]
        line = f"criterion {n:>2}: {r['status']:<4} {r['title']}"
        if r["why"]:
            line += f"  [{r['why']}]"
        tr.write_line(line)
