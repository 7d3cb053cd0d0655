import numpy as np
import pytest

from rdpp import gaussian as g

ACCEPTANCE_LINES = []


@pytest.fixture
def ref_model():
    return g.GaussianModel(sigma_s_sq=1.0, sigma_u_sq=1.0, rho=0.7, gamma=0.5, sigma_n_sq=0.1)


@pytest.fixture
def ref_channel():
    return g.AffineChannel(c=0.5, sigma_z_sq=0.25)


@pytest.fixture
def bsc01():
    return np.array([[0.9, 0.1], [0.1, 0.9]])


def random_pmf(rng, n, floor=0.0):
    p = rng.dirichlet(np.ones(n)) + floor
    return p / p.sum()


def random_channel(rng, n_in, n_out, floor=0.0):
    return np.vstack([random_pmf(rng, n_out, floor) for _ in range(n_in)])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
