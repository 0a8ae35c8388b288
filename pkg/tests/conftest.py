"""Collects acceptance results and prints one PASS/FAIL line per criterion."""

import pytest

_ACCEPTANCE = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when == "call":
        for key, value in report.user_properties:
            if key == "acceptance":
                _ACCEPTANCE.append(value)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    from test_acceptance import format_line

    terminalreporter.section("acceptance criteria")
    for entry in sorted(_ACCEPTANCE):
        terminalreporter.write_line(format_line(*entry))
    passed = sum(1 for _, ok, _, _ in _ACCEPTANCE if ok)
    terminalreporter.write_line(f"{passed}/{len(_ACCEPTANCE)} criteria passed")
