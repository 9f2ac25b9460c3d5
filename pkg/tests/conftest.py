import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=300, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_criteria: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call":
        return
    n, title = mark.args
    note = getattr(item, "criterion_note", "")
    verdict = "PASS" if rep.passed else "FAIL"
    prev = _criteria.get(n)
    if prev and prev[0] == "FAIL":
        verdict = "FAIL"
    _criteria[n] = (verdict, f"{title}{' | ' + note if note else ''}")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        verdict, text = _criteria[n]
        terminalreporter.write_line(f"criterion {n:2d}: {verdict}  {text}")


@pytest.fixture
def note(request):
    """Attach a short remark to the acceptance line of this test."""
    def put(text: str):
        request.node.criterion_note = text
    return put
