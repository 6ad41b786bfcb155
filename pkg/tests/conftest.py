"""Collects acceptance outcomes and prints one line per criterion."""

import pytest

_OUTCOMES: dict[int, list] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number, title = marker.kwargs["criterion"], marker.kwargs["title"]
    entry = _OUTCOMES.setdefault(number, [title, True, False])
    if report.when == "call":
        entry[2] = True
    if report.failed:
        entry[1] = False


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_OUTCOMES):
        title, passed, ran = _OUTCOMES[number]
        status = "PASS" if passed and ran else ("FAIL" if ran or not passed else "NOT RUN")
        terminalreporter.write_line(f"criterion {number}: {status}  {title}")
