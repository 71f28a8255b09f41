import numpy as np
import pytest
from hypothesis import settings

from bootsgd import _sgd

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

_ACCEPTANCE = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): acceptance criterion")
    _sgd.warm_up()


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call":
        return
    number, text = marker.args
    _ACCEPTANCE.append((number, item.name, text, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, text, outcome in sorted(_ACCEPTANCE, key=lambda r: (int(str(r[0]).rstrip("ab")), str(r[0]), r[1])):
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"[{status}] #{number} {text} ({name})")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
