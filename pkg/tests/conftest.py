import numpy as np
import pytest

from linconts._backend import HAVE_NUMBA
from linconts.environment import BanditInstance

BACKENDS = ["numba", "numpy"] if HAVE_NUMBA else ["numpy"]

# mu_i, r_i for the three-arm reference instance with eta = 0.5
INSTANCE_A_ARMS = ((0.1, 1.0), (0.9, 0.1), (0.3, 0.2))


@pytest.fixture
def instance_a():
    return BanditInstance(INSTANCE_A_ARMS, 0.5, "A")


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


def random_instances(count, seed, n_max=8):
    """Random (mu, r, eta) triples; roughly a third carry ties on a coarse grid."""
    rs = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rs.integers(1, n_max + 1))
        mu = rs.random(n)
        r = 1.0 - rs.random(n)
        eta = float(rs.random())
        if rs.random() < 0.3:
            mu = np.round(mu, 1)
            r = np.round(r, 1) + 0.1
            r = np.minimum(r, 1.0)
            eta = round(eta, 1)
        yield mu, r, eta


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
