import pytest

from collapse_radiance.atoms import Atom, Shell, builtin_atom

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def ge():
    return builtin_atom("Ge")


@pytest.fixture(scope="session")
def xe():
    return builtin_atom("Xe")


@pytest.fixture(scope="session")
def hydrogen():
    return Atom("H", 1, (Shell("1s", 1, 5.29177210903e-11),), "Bohr radius")


@pytest.fixture(scope="session")
def toy_atom():
    shells = (Shell("1s", 2, 1.0e-11), Shell("2s", 2, 4.5e-11), Shell("2p", 2, 3.9e-11))
    return Atom("C", 6, shells, "toy")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
