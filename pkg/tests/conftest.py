import time

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("gdrm", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("gdrm")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.call_report = rep


class Criterion:
    def __init__(self, number: int, title: str, limit_s: float):
        self.number, self.title, self.limit_s = number, title, limit_s
        self.detail = ""
        self.start = time.perf_counter()

    @property
    def elapsed(self) -> float:
        return time.perf_counter() - self.start

    def check_time(self) -> None:
        assert self.elapsed < self.limit_s, f"took {self.elapsed:.1f}s, limit {self.limit_s}s"


@pytest.fixture
def criterion(request):
    """Acceptance bookkeeping: prints one PASS/FAIL line after the test."""
    marker = request.node.get_closest_marker("criterion")
    c = Criterion(*marker.args)
    yield c
    rep = getattr(request.node, "call_report", None)
    status = "PASS" if rep is not None and rep.passed else "FAIL"
    line = f"ACCEPTANCE {c.number:>2} {status} {c.title} ({c.elapsed:.2f}s)"
    if c.detail:
        line += f" - {c.detail}"
    reporter = request.config.pluginmanager.get_plugin("terminalreporter")
    if reporter is not None:
        reporter.write_line(line)
    else:
        print(line)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title, limit_s): acceptance criterion")
