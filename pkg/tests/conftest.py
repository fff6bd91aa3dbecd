import contextlib
import os
import sys
import time

import pytest

sys.path.insert(0, os.path.dirname(__file__))

_criteria = {}


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    key = props["criterion"]
    if report.when == "call" or report.outcome != "passed":
        title, outcome, dur = _criteria.get(key, (props.get("title", ""), "passed", 0.0))
        if report.outcome != "passed":
            outcome = report.outcome
        _criteria[key] = (title, outcome, dur + report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_criteria):
        title, outcome, dur = _criteria[key]
        mark = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {key:2d} {mark}  {title}  ({dur:.1f} s)")


class _Budget:
    def __init__(self, record_property):
        self._record = record_property

    @contextlib.contextmanager
    def __call__(self, n, title, seconds):
        self._record("criterion", n)
        self._record("title", title)
        t0 = time.perf_counter()
        yield
        elapsed = time.perf_counter() - t0
        print(f"criterion {n}: {title}: {elapsed:.2f} s (budget {seconds} s)")
        assert elapsed < seconds, f"runtime {elapsed:.1f} s exceeds the {seconds} s budget"


@pytest.fixture
def criterion(record_property):
    """``with criterion(n, title, seconds):`` tags the test and enforces its runtime."""
    return _Budget(record_property)
