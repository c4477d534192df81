from __future__ import annotations

import pytest


def pytest_configure(config):
    config._acceptance_lines = []


@pytest.fixture
def criterion(request):
    """``report(number, title, ok, detail)`` records a pass/fail line and asserts ``ok``."""

    def report(number: int, title: str, ok: bool, detail: str):
        line = f"criterion {number:2d}  {'PASS' if ok else 'FAIL'}  {title}  [{detail}]"
        request.config._acceptance_lines.append(line)
        assert ok, line

    return report


def pytest_terminal_summary(terminalreporter, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
