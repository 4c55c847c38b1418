import numpy as np
import pytest

from mfearl.benchmarks import BaseFunction
from mfearl.encoding import MultitaskProblem, Task

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion reported in the summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when not in ("setup", "call"):
        return
    number, title = marker.args
    if rep.when == "setup" and rep.passed:
        return
    detail = "; ".join(str(v) for k, v in item.user_properties if k == "detail")
    _criteria[number] = (title, "PASS" if rep.passed else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, status, detail = _criteria[number]
        line = f"criterion {number:>2}: {status}  {title}"
        terminalreporter.write_line(line + (f"  [{detail}]" if detail else ""))


def sphere_pair(dim=10, lo=-100.0, hi=100.0):
    """Two identical shifted Sphere tasks."""
    rng = np.random.default_rng(123)
    shift = rng.uniform(lo / 2, hi / 2, size=dim)
    tasks = [Task(j, dim, lo, hi, BaseFunction.SPHERE, shift, np.eye(dim)) for j in range(2)]
    return MultitaskProblem(tasks, name="sphere-pair")


@pytest.fixture
def rng():
    return np.random.default_rng(20240)
