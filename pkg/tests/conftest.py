"""Shared pytest hooks: print one line per acceptance criterion at the end."""

from __future__ import annotations

_ACCEPTANCE: dict[str, bool] = {}


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    _ACCEPTANCE[name] = report.passed


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE):
        flag = "PASS" if _ACCEPTANCE[name] else "FAIL"
        terminalreporter.write_line(f"{flag} {name}")
