import numpy as np
import pytest

import madelung_maxent as mm
from madelung_maxent import verify


@pytest.fixture(scope="session")
def params1():
    return mm.make_params(1.0, 1.0, 1.0)


@pytest.fixture(scope="session")
def radial1(params1):
    """Canonical radial solve at beta = 1 (also warms the compiled kernel)."""
    return mm.solve_radial(mm.SolveRequest(params=params1))


@pytest.fixture(scope="session")
def obs1(radial1):
    return mm.observables(radial1)


@pytest.fixture(scope="session")
def axis1(params1):
    return mm.solve_cartesian_factor(
        mm.SolveRequest(params=params1, geometry=mm.Geometry.CARTESIAN_FACTOR))


@pytest.fixture(scope="session")
def golden():
    return verify.load_golden()


@pytest.fixture(scope="session")
def uniform_disk():
    """Synthetic U == 0 on the unit disk (not a solution; exercises plumbing)."""
    nodes = np.linspace(0.0, 1.0, 101)
    zeros = np.zeros_like(nodes)
    rho = np.full_like(nodes, 1.0 / np.pi)
    return mm.RadialProfile(params=mm.make_params(1.0, 1.0, 1.0), nodes=nodes,
                            u=zeros, du=zeros, u0=0.0, r_m=1.0, rho=rho, z=np.pi)
