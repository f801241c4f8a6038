import time

import pytest

CRITERIA = (
    "codec fidelity",
    "singlet anti-correlation",
    "continuity at desk scale",
    "qubit accounting",
    "intercept-resend detection",
    "trojan-horse count defense",
    "tamper-halt",
    "determinism",
)

_results = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    name = marker.args[0]
    failed = report.failed or (report.when == "call" and not report.passed)
    if report.when in ("setup", "call") or failed:
        previous = _results.get(name, (True, 0.0))
        _results[name] = (previous[0] and not failed, previous[1] + report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for name in CRITERIA:
        if name not in _results:
            terminalreporter.write_line(f"NOT RUN  {name}")
            continue
        ok, seconds = _results[name]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}     {name}  ({seconds:.2f}s)")


@pytest.fixture
def stopwatch():
    class Watch:
        def __enter__(self):
            self.start = time.perf_counter()
            return self

        def __exit__(self, *exc):
            self.elapsed = time.perf_counter() - self.start

    return Watch
