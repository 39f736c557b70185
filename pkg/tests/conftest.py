from __future__ import annotations

import pytest

from privscribe import _kernels_py

try:
    from privscribe import _kernels_c
except ImportError:  # extension not built
    _kernels_c = None

BACKENDS = [pytest.param(_kernels_py, id="python")]
if _kernels_c is not None:
    BACKENDS.append(pytest.param(_kernels_c, id="cython"))


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


_CRITERIA: dict[int, tuple[str, bool]] = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    for name, args in getattr(report, "criterion", ()):
        number, title = args
        ok = report.outcome == "passed"
        prev = _CRITERIA.get(number)
        _CRITERIA[number] = (title, ok and (prev is None or prev[1]))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    report.criterion = [("criterion", m.args) for m in item.iter_markers("criterion")]


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, ok = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}")
