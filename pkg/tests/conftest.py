import pytest
from hypothesis import HealthCheck, settings

from thetalab.lattice import ExtendedExchangeMatrix
from thetalab.scattering import build_scattering_diagram

settings.register_profile(
    "suite", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("suite")

G2 = ((0, -3), (1, 0))
A2 = ((0, 1), (-1, 0))
B2 = ((0, 2), (-1, 0))
KRONECKER = ((0, 2), (-2, 0))
MARKOV = ((0, 2, -2), (-2, 0, 2), (2, -2, 0))


@pytest.fixture(scope="session")
def g2():
    return ExtendedExchangeMatrix.principal(G2)


@pytest.fixture(scope="session")
def a2():
    return ExtendedExchangeMatrix.principal(A2)


@pytest.fixture(scope="session")
def markov():
    return ExtendedExchangeMatrix.principal(MARKOV)


@pytest.fixture(scope="session")
def g2_diagram(g2):
    return build_scattering_diagram(g2, 8)


@pytest.fixture(scope="session")
def a2_diagram(a2):
    return build_scattering_diagram(a2, 6)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
