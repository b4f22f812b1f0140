import pytest

from rgbm import ModelParams

FIG1 = ModelParams(mu=0.0, sigma=0.5, b=1.0, r=0.0, q=0.0, s0=2.0)
FIG2 = ModelParams(mu=0.125, sigma=0.5, b=1.0, r=0.125, s0=1.0)
FIG3 = ModelParams(mu=0.02, sigma=0.2, b=1.0, r=0.02, s0=1.0)
FIG4 = ModelParams(mu=0.0, sigma=0.3, b=0.5, r=0.0, q=0.03, s0=1.0)


@pytest.fixture
def fig1():
    return FIG1


@pytest.fixture
def fig2():
    return FIG2


@pytest.fixture
def fig3():
    return FIG3


@pytest.fixture
def fig4():
    return FIG4


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
