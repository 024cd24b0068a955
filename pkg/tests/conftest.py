import pytest

from mcflab import kernels
from mcflab.shrinker import scale_torus, shoot_torus


@pytest.fixture(scope="session")
def torus():
    return shoot_torus(2)


@pytest.fixture(scope="session")
def torus_t1(torus):
    # scale used by the periodic spike experiment (eps = 0.1)
    return scale_torus(torus, 0.45, 0.1)


@pytest.fixture(scope="session")
def torus_t2(torus):
    return scale_torus(torus, 0.16, 0.1)


@pytest.fixture(params=kernels.available())
def backend(request):
    before = kernels.backend_name()
    kernels.use_backend(request.param)
    yield request.param
    kernels.use_backend(before)


# one line per acceptance criterion, printed after the run
_ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture
def report():
    def _report(label: str, passed: bool, detail: str = "") -> bool:
        _ACCEPTANCE.append((label, bool(passed), detail))
        return bool(passed)

    return _report


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}  {detail}".rstrip())
