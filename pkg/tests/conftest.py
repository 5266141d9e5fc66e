import numpy as np
import pytest

from gapsolve import PhysicalParams, SolverConfig


@pytest.fixture(scope="session")
def cfg():
    return SolverConfig()


@pytest.fixture(scope="session")
def weak_params():
    """Well-separated weak couplings; the classic textbook regime."""
    return PhysicalParams(epsilon=1e-3, debye=1.0, u0=0.2, u1=0.25, u2=0.35)


@pytest.fixture(scope="session")
def strong_params():
    """Library defaults: a close strong triple where the contraction window
    is nonempty."""
    return PhysicalParams()


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20130827)
