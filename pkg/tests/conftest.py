import pytest

_CRITERIA = {}


@pytest.fixture
def criterion(request):
    """Record a PASS/FAIL line for an acceptance criterion; the test outcome decides which."""
    def register(number, title):
        _CRITERIA[number] = {"title": title, "nodeid": request.node.nodeid, "details": []}
        return _CRITERIA[number]["details"]
    return register


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when != "call":
        return
    for entry in _CRITERIA.values():
        if entry["nodeid"] == item.nodeid:
            entry["passed"] = report.passed


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        entry = _CRITERIA[number]
        verdict = "PASS" if entry.get("passed") else "FAIL"
        details = "; ".join(entry["details"])
        terminalreporter.write_line(f"{verdict} criterion {number}: {entry['title']}"
                                    + (f" ({details})" if details else ""))
