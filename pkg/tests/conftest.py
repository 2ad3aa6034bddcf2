import pytest

from mcfreq import DiffusionChannel, PassiveMembrane

# reference biological parameter set
MU = 490.0
K = 0.05
MU_HAT = 9.9

ACCEPTANCE_LINES = []


@pytest.fixture
def mem():
    return PassiveMembrane(K, MU_HAT)


@pytest.fixture
def bl(mem):
    return mem.boundary_layer()


@pytest.fixture
def chan():
    return DiffusionChannel(MU, 100.0)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
