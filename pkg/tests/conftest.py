import sys
from pathlib import Path

import pytest

TESTS = Path(__file__).resolve().parent
sys.path.insert(0, str(TESTS))

FIXTURES = TESTS / "fixtures"


@pytest.fixture
def fixtures():
    return FIXTURES


# -- acceptance reporting: one PASS/FAIL line per criterion --------------------------

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion a test belongs to")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or (rep.when != "call" and not rep.failed):
        return
    n, title = mark.args
    entry = _criteria.setdefault(n, {"title": title, "ok": True, "failed": []})
    if rep.failed or hasattr(rep, "wasxfail"):
        # an expected failure still means the criterion is not met
        entry["ok"] = False
        entry["failed"].append(item.name)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        e = _criteria[n]
        line = f"{'PASS' if e['ok'] else 'FAIL'} criterion {n}: {e['title']}"
        if e["failed"]:
            line += f"  (failed: {', '.join(e['failed'])})"
        terminalreporter.write_line(line)
