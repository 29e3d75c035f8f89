import pytest

from hamelflow.background import HamelParameters
from hamelflow.grid import RadialGrid


@pytest.fixture(scope="session")
def grid():
    """Default production grid: 64 log panels, Gauss-8, r_max = 1e3."""
    return RadialGrid.build(64, 8, 1.0e3)


@pytest.fixture(scope="session")
def grid_fine():
    return RadialGrid.build(128, 8, 1.0e3)


@pytest.fixture(scope="session")
def params():
    return HamelParameters(alpha=1.3, gamma=4.0, rho=2.5)
