import functools

import numpy as np
import pytest

from bkp_stability.params import PhysicalParams, Sigma
from bkp_stability.wave import newton_refine, stokes_wave

ACCEPTANCE_LINES = []


@functools.lru_cache(maxsize=None)
def refined(b, kappa, k, a, n_modes=32, sigma=-1):
    p = PhysicalParams(b, kappa, k, Sigma(sigma))
    return newton_refine(stokes_wave(p, a), p, n_modes, 1e-12)


@pytest.fixture
def ch():
    """b = 2, kappa = 2, k = 1, sigma = -1: the reference parameter set."""
    return PhysicalParams(2.0, 2.0, 1.0, Sigma.MINUS_ONE)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)
