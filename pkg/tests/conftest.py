import numpy as np
import pytest

from hgsp.signal_core import SpatiotemporalSignal


@pytest.fixture(scope="session")
def eeg_like():
    """4 channels x 400 samples at 400 Hz: noise plus a shared 6 Hz rhythm."""
    rng = np.random.default_rng(1234)
    t = np.arange(400) / 400.0
    data = rng.standard_normal((4, 400)) + 1.5 * np.sin(2 * np.pi * 6 * t)
    return SpatiotemporalSignal(data, 400.0)


_acceptance = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(label): exit criterion reported in the summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker and report.when == "call":
        _acceptance.append((marker.args[0], report.passed, f"{report.duration:.2f}s"))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed, duration in sorted(_acceptance):
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {label}  ({duration})")
