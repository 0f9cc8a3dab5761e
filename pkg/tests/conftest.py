"""Shared fixtures and the per-criterion acceptance summary."""
from __future__ import annotations

from collections import OrderedDict

import numpy as np
import pytest

from mrpi.synthetic import circle_truth, disk_image

# criterion -> list of (test name, passed, detail)
_AC_RESULTS: "OrderedDict[str, list]" = OrderedDict()


@pytest.fixture(scope="session")
def disk():
    return disk_image(128, 40.0)


@pytest.fixture(scope="session")
def disk_truth():
    return circle_truth(128, 40.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("ac")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        detail = "; ".join(str(v) for k, v in item.user_properties if k == "detail")
        _AC_RESULTS.setdefault(marker.args[0], []).append(
            (item.name, report.outcome == "passed", detail)
        )


def pytest_terminal_summary(terminalreporter):
    if not _AC_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_AC_RESULTS, key=lambda s: int(s[2:])):
        rows = _AC_RESULTS[name]
        ok = all(passed for _, passed, _ in rows)
        details = "; ".join(d for _, _, d in rows if d)
        terminalreporter.write_line(f"{name}: {'PASS' if ok else 'FAIL'}  {details}")
