import pytest

from boostpareto.pareto import LatticeSpec, scan
from boostpareto.pv_model import DimensionlessParams

POINT_A = (1.66, 0.726)
POINT_B = (3.2, 0.492)
POINT_C = (3.2, 0.2)

_criteria: list[tuple[str, bool, str]] = []


@pytest.fixture(scope="session")
def full_scan():
    return scan(LatticeSpec(), threads=4)


@pytest.fixture
def orbit_a():
    return DimensionlessParams.defaults(*POINT_A)


@pytest.fixture
def orbit_b():
    return DimensionlessParams.defaults(*POINT_B)


@pytest.fixture
def orbit_c():
    return DimensionlessParams.defaults(*POINT_C)


@pytest.fixture
def criterion():
    """Record an acceptance criterion outcome for the end-of-run summary."""
    def record(name: str, passed: bool, detail: str = "") -> bool:
        _criteria.append((name, bool(passed), detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in _criteria:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}  {detail}")
