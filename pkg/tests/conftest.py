import numpy as np
import pytest

from lle_pinning.field import PotentialSpec, TorusGrid
from lle_pinning.stationary import Params
from lle_pinning.workflows import analyse, eps_branch, soliton

V0 = PotentialSpec(0.1, (0.5,))
BRIGHT = Params(d=0.1, zeta=3.7, mu=1.0, f0=2.0, eps=0.0, potential=V0)
DARK = Params(d=-0.1, zeta=4.5, mu=1.0, f0=2.0, eps=0.0, potential=V0)

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def grid():
    return TorusGrid(256)


@pytest.fixture(scope="session")
def bright(grid):
    rep = soliton(BRIGHT, grid)
    assert rep.converged
    return rep


@pytest.fixture(scope="session")
def bright_analysis(bright):
    return analyse(bright.solution, BRIGHT)


@pytest.fixture(scope="session")
def bright_branches(bright_analysis):
    """eps-branches over [-0.1, 0.1] from both zeros, keyed by the sign of sigma0."""
    out = {}
    for z in bright_analysis.veff.zeros:
        out["negative" if z.sigma0 < 0 else "positive"] = (z, eps_branch(bright_analysis, z, 0.1, ds_max=0.02))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
