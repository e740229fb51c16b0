import numpy as np
import pytest

from epispec.synthetic import write_bonn_like

FS = 173.61

# acceptance criterion number -> list of (test id, outcome)
_CRITERIA: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion covered by the test")


def pytest_runtest_logreport(report):
    crit = getattr(report, "criterion", None)
    if crit is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _CRITERIA.setdefault(crit, []).append((report.nodeid, report.outcome, report.longrepr))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        outcome.get_result().criterion = marker.args[0]


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit in sorted(_CRITERIA):
        results = _CRITERIA[crit]
        outcomes = {o for _, o, _ in results}
        if "failed" in outcomes:
            status = "FAIL"
        elif outcomes == {"skipped"}:
            status = "SKIP"
        else:
            status = "PASS"
        reasons = [str(r[2]).removeprefix("Skipped: ") for _, o, r in results
                   if o == "skipped" and isinstance(r, tuple) and len(r) == 3]
        detail = ""
        if status == "SKIP":
            detail = f" ({reasons[0]})" if reasons else ""
        elif status == "PASS" and "skipped" in outcomes:
            detail = " for the checks that ran; skipped: " + (reasons[0] if reasons else "see log")
        ran = sum(o != "skipped" for _, o, _ in results)
        tr.write_line(f"criterion {crit:>2}: {status}{detail}  [{ran} of {len(results)} check(s) ran]")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def small_archive(tmp_path_factory):
    """Ten short synthetic segments per class plus a manifest."""
    root = tmp_path_factory.mktemp("archive")
    return write_bonn_like(root, per_class=10, n=1024, seed=3)


def sine(freq, n=4097, fs=FS, amp=1.0, phase=0.0):
    t = np.arange(n) / fs
    return amp * np.sin(2 * np.pi * freq * t + phase)
