import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

_criteria: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion check")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    prev = _criteria.get(number, (title, "PASS"))[1]
    if report.failed:
        _criteria[number] = (title, "FAIL")
    elif report.skipped:
        _criteria[number] = (title, "SKIP" if prev == "PASS" else prev)
    elif report.when == "call":
        _criteria[number] = (title, prev)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, status = _criteria[number]
        terminalreporter.write_line(f"{status} criterion {number:2d}: {title}")
