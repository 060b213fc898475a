import pytest

_CRITERIA: dict[int, dict] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    entry = _CRITERIA.setdefault(number, {"title": title, "failed": False, "ran": False, "details": []})
    if report.when == "call" or report.failed:
        entry["ran"] = entry["ran"] or report.when == "call"
        entry["failed"] = entry["failed"] or report.failed
        if report.when == "call":
            entry["details"].extend(v for k, v in report.user_properties if k == "detail")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        e = _CRITERIA[number]
        status = "FAIL" if e["failed"] or not e["ran"] else "PASS"
        terminalreporter.write_line(f"{status}  criterion {number}: {e['title']}")
        for d in e["details"]:
            terminalreporter.write_line(f"        {d}")
