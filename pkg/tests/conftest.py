import numpy as np
import pytest

from radimex.physics import ConstantOpacity, Constants, EosIdealGas, PowerLawOpacity

TABLE_EOS = EosIdealGas(5.0 / 3.0, 1.447e12)
SMALL_M_OPACITY = ConstantOpacity(577.35, 0.0)
M45_OPACITY = PowerLawOpacity(4.494e8, 2.0, -3.5, 0.4006, 1.0)


@pytest.fixture
def eos():
    return TABLE_EOS


@pytest.fixture
def constants():
    return Constants()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES: dict[str, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES, key=lambda k: int(k.split("-")[1])):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
