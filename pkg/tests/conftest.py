import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fracbvp.eigen import principal_eigenpair
from fracbvp.grid import production_mesh
from fracbvp.operator import WeightFamily, assemble
from fracbvp.shooting import HenonParams, find_crossings

# wall-clock cost of the shared crossing scan, charged to the acceptance
# criterion that relies on it no matter which test materializes the fixture
FIXTURE_COST = {"henon_crossings": 0.0}


@pytest.fixture(scope="session")
def unit_weight():
    return WeightFamily.constant(1.0)


@pytest.fixture(scope="session")
def classical_eig(unit_weight):
    """alpha = 2, h = 1 eigenpair on the n = 400 production mesh."""
    mesh = production_mesh(2.0, 400)
    A = assemble(mesh, 2.0, unit_weight)
    return mesh, A, principal_eigenpair(A)


@pytest.fixture(scope="session")
def henon_params():
    return HenonParams(l=4.0, p=2.0)


@pytest.fixture(scope="session")
def henon_crossings(henon_params):
    """All crossings of z(beta) = 1 for l = 4, p = 2 (default scan)."""
    t0 = time.perf_counter()
    records = find_crossings(1.0, henon_params, scan_points=2000)
    FIXTURE_COST["henon_crossings"] = time.perf_counter() - t0
    return records
