import numpy as np
import pytest

from torsilab.fem import solve_exit_time
from torsilab.meshing import build_box_mesh, build_disk_mesh
from torsilab.metrics import euclidean


def observed_order(hs, errs, floor=1e-10):
    """Convergence order from a halving study, with a roundoff floor.

    Errors that are all below the floor satisfy any O(h^p) envelope
    trivially (the quantity is computed exactly at this precision), so the
    order is reported as +inf.  Mixing floor-level and genuine errors would
    corrupt a slope fit, so the floor applies to the whole sequence.
    """
    errs = np.asarray(errs, dtype=float)
    if errs.max() <= floor:
        return float("inf")
    hs = np.asarray(hs, dtype=float)
    slope = np.polyfit(np.log(hs), np.log(np.maximum(errs, 1e-300)), 1)[0]
    return float(slope)


@pytest.fixture(scope="session")
def disk_mesh_l2():
    return build_disk_mesh(1.0, 2)


@pytest.fixture(scope="session")
def disk_mesh_l3():
    return build_disk_mesh(1.0, 3)


@pytest.fixture(scope="session")
def box_mesh_l3():
    return build_box_mesh([(0.0, 1.0)] * 3, 3)


@pytest.fixture(scope="session")
def disk_solution_l3(disk_mesh_l3):
    return solve_exit_time(disk_mesh_l3, euclidean(2))
