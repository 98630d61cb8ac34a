import numpy as np
import pytest

from allee4.model import ModelParams

# the two reference multi-cycle parameter sets (see tests and README)
FIG5A = dict(K=20.0, A=2.0, a=0.004905, b=-0.10891, d=24.28)
FIG5B = dict(K=10.5, A=-0.5, a=0.01809954751, b=-0.1809954751, d=8.99)

# verified three-cycle set: constructed by perturbing (B1, B3, B5) off the
# codimension-3 degenerate-Hopf root at the same K and A as FIG5B
THREE_CYCLE = dict(K=10.5, A=-0.5, a=0.013131587070323228,
                   b=-0.16314440078718166, d=5.3741989657594635)

# oracle values recomputed with the extended-precision quadratic (mpmath):
FIG5A_ALPHA = 9.802480588123235
FIG5A_BETA = 20.79816394801395
FIG5B_ALPHA = 4.923089200070431
FIG5B_BETA = 11.222628255959937


@pytest.fixture(scope="session")
def fig5a():
    return ModelParams(**FIG5A)


@pytest.fixture(scope="session")
def fig5b():
    return ModelParams(**FIG5B)


@pytest.fixture(scope="session")
def three_cycle_params():
    return ModelParams(**THREE_CYCLE)


@pytest.fixture()
def rng():
    # fresh deterministic stream per test, independent of execution order
    return np.random.default_rng(20260810)
