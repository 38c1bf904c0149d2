import numpy as np
import pytest

from trilind import kernels
from trilind.fock import HilbertSpace


@pytest.fixture
def small_space():
    return HilbertSpace(3, 2)


@pytest.fixture(params=kernels.available_backends())
def backend(request):
    return kernels.get_backend(request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_density(space, rng, rank=3):
    z = rng.normal(size=(space.dim, rank)) + 1j * rng.normal(size=(space.dim, rank))
    m = z @ z.conj().T
    return m / np.trace(m).real


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
