from __future__ import annotations

import re

import pytest

ACCEPTANCE_LINES: dict[str, tuple[bool, str]] = {}


class Recorder:
    """Collects one pass/fail line per acceptance criterion."""

    def __init__(self, key: str):
        self.key = key
        self.notes: list[str] = []

    def note(self, text: str):
        self.notes.append(text)


@pytest.fixture
def criterion(request):
    marker = request.node.get_closest_marker("criterion")
    key = marker.args[0] if marker else request.node.name
    rec = Recorder(key)
    yield rec
    rep = getattr(request.node, "rep_call", None)
    ok = rep is not None and rep.passed
    ACCEPTANCE_LINES[key] = (ok, "; ".join(rec.notes))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(key): acceptance criterion reported in the summary")


def _order(key: str):
    m = re.match(r"(\d+)(.*)", key)
    return (int(m.group(1)), m.group(2)) if m else (10 ** 6, key)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES, key=_order):
        ok, notes = ACCEPTANCE_LINES[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {key}" + (f"  [{notes}]" if notes else ""))
