import numpy as np
import pytest

from dwtransport.grid import default_grid
from dwtransport.potential import LatticeParams
from dwtransport.spectrum import assemble_hamiltonian, localized_states, lowest_eigenstates

THETA_B = -0.474 * np.pi


@pytest.fixture(scope="session")
def grid_small():
    return default_grid(200)


@pytest.fixture(scope="session")
def grid_medium():
    return default_grid(500)


@pytest.fixture(scope="session")
def double_well_params():
    """Symmetric lambda/2 configuration at the production depth."""
    return LatticeParams(100.0, 0.0, THETA_B)


@pytest.fixture(scope="session")
def merged_params():
    """End-of-merge single-well configuration."""
    return LatticeParams(100.0, 0.45 * np.pi, THETA_B)


def well_states(grid, params):
    doublet = lowest_eigenstates(assemble_hamiltonian(grid, params), 2)
    return localized_states(doublet[0], doublet[1])


@pytest.fixture(scope="session")
def localized_pair(grid_medium, double_well_params):
    return well_states(grid_medium, double_well_params)
