"""Shared fixtures: the reference test problem and small builders."""

import numpy as np
import pytest

from paretogen.diffusion import make_schedule, standard_normal_model
from paretogen.objectives import make_multiwell

# three orthogonal wells of radius 1.2 in R^8, deliberately not axis-aligned
ANCHORS = np.array([
    [-0.000638,  0.462206, -0.031214,  0.322019, -0.054709, -0.360854,  0.986711,  0.122009],
    [ 0.129853, -0.060221,  0.574091,  0.309158, -0.421327, -0.692633, -0.267381, -0.515367],
    [-0.256907, -0.274227, -0.594047,  0.538482,  0.042160, -0.547256, -0.325693,  0.498599],
])
WELL_BOUNDS = np.stack([np.zeros(3), np.full(3, 16.0)], axis=1)


@pytest.fixture(scope="session")
def sched100():
    return make_schedule(100)


@pytest.fixture(scope="session")
def model8():
    return standard_normal_model(8)


@pytest.fixture()
def wells():
    return make_multiwell(3, 8, ANCHORS, bounds=WELL_BOUNDS, name="wells3d8")
