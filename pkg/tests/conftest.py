import numpy as np
import pytest
from hypothesis import settings

from irka import LtiSystem
from support import CYCLE_POLES, CYCLE_RESIDUES

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture
def scalar_sys():
    return LtiSystem([[-1.0]], [1.0], [1.0])


@pytest.fixture
def sym2():
    return LtiSystem(np.diag([-1.0, -2.0]), [1.0, 1.0], [1.0, 1.0])


@pytest.fixture
def cycle_sys():
    return LtiSystem(np.diag(CYCLE_POLES), np.ones(4), CYCLE_RESIDUES)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# one PASS/FAIL line per acceptance criterion, printed after the run
_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(num, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        num, title = mark.args
        _criteria[num] = (title, rep.passed, getattr(item, "criterion_detail", ""))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for num in sorted(_criteria):
        title, ok, detail = _criteria[num]
        tail = f"  ({detail})" if detail else ""
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {num:2d}. {title}{tail}")
