import numpy as np
import pytest

from diqkd_lab import chsh, qmath


@pytest.fixture
def phi_plus():
    return qmath.DensityMatrix(qmath.bell_projector(0))


@pytest.fixture
def protocol_measurements():
    return chsh.MeasurementSet.protocol()


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
