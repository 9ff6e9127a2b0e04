import numpy as np
import pytest

from dynaquant import build_space

# acceptance verdicts collected by test_acceptance.py, printed at the end
ACCEPTANCE: dict = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def space16():
    return build_space(16)


@pytest.fixture(scope="session")
def space32():
    return build_space(32)


def random_matrix(rng, n, hermitian=False, scale=1.0):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    if hermitian:
        a = 0.5 * (a + a.conj().T)
    return scale * a


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])
