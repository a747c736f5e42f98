import math

import pytest

from cbflab import EstimateConstants, PhysicsParams, TorusGrid, single_mode_field
from cbflab.conditions import threshold_2d


@pytest.fixture(scope="session")
def grid2d():
    return TorusGrid(dim=2, N=32, L=2.0 * math.pi)


@pytest.fixture(scope="session")
def grid2d_small():
    return TorusGrid(dim=2, N=16, L=2.0 * math.pi)


@pytest.fixture(scope="session")
def grid3d():
    return TorusGrid(dim=3, N=16, L=2.0 * math.pi)


@pytest.fixture(scope="session")
def constants():
    return EstimateConstants()


@pytest.fixture(scope="session")
def small_forcing_params(grid2d, constants):
    """2D, r = 3 setup with the forcing at half the smallness threshold."""
    f_h = 0.5 * threshold_2d(1.0, grid2d.lambda1, constants.c1) * grid2d.lambda1
    f = single_mode_field(grid2d, (1, 0), (0.0, 1.0), h_norm=f_h)
    return PhysicsParams(mu=1.0, beta=1.0, r=3.0, forcing=f)
