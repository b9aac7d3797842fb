"""Shared fixtures: tables are expensive, so build each once per session."""

import pytest

from altsel.bellman import (
    compute_derivatives,
    compute_thresholds,
    compute_values,
    converge_xi,
)
from altsel.numerics import GridSpec

MID_STEP = 1e-3
COARSE_STEP = 1e-2


@pytest.fixture(scope="session")
def grid_mid():
    return GridSpec.from_step(MID_STEP)


@pytest.fixture(scope="session")
def grid_coarse():
    return GridSpec.from_step(COARSE_STEP)


@pytest.fixture(scope="session")
def vt_mid(grid_mid):
    return compute_values(grid_mid, 50)


@pytest.fixture(scope="session")
def tf_mid(vt_mid):
    return compute_thresholds(vt_mid, tol_xi=1e-6)


@pytest.fixture(scope="session")
def dt_mid(vt_mid, tf_mid):
    return compute_derivatives(vt_mid, tf_mid)


@pytest.fixture(scope="session")
def xi_mid(grid_mid):
    xi, _ = converge_xi(grid_mid, 1e-6)
    return xi
