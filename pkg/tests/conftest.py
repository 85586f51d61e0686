import pytest

_criteria: dict[str, tuple[str, bool]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name, title): an acceptance criterion, reported in the summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or not (report.when == "call" or report.failed):
        return
    name, title = marker.args
    ok = report.passed and not report.skipped
    previous = _criteria.get(name)
    _criteria[name] = (title, ok if previous is None else previous[1] and ok)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_criteria):
        title, ok = _criteria[name]
        terminalreporter.write_line(f"{name} {'PASS' if ok else 'FAIL'}  {title}")
