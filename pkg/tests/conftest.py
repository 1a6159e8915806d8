from __future__ import annotations

import numpy as np
import pytest

from hypns.geometry import HyperbolicModel
from hypns.harmonic import FourierBoundaryData, extend


@pytest.fixture(scope="session")
def disk1():
    return HyperbolicModel.disk(1.0)


@pytest.fixture(scope="session")
def disk2():
    return HyperbolicModel.disk(2.0)


@pytest.fixture(scope="session")
def sinh_warp():
    """Warped product with f = sinh r (curvature -1)."""
    return HyperbolicModel.warped(1.0, 1.0, "constant")


@pytest.fixture(scope="session")
def warped_default():
    """Variable curvature between -2.25 and -1."""
    return HyperbolicModel.warped(1.0, 1.5)


@pytest.fixture(scope="session")
def cos_phi():
    return FourierBoundaryData.cos(1)


@pytest.fixture(scope="session")
def mixed_phi():
    return FourierBoundaryData(0.4, ((1, 1.0, 0.3), (2, -0.5, 0.2), (5, 0.1, 0.1)))


@pytest.fixture(scope="session")
def F_disk(disk1, cos_phi):
    return extend(cos_phi, disk1)


@pytest.fixture(scope="session")
def F_warped(warped_default, mixed_phi):
    return extend(mixed_phi, warped_default)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_disk_points(rng, n, r_max=0.9):
    r = r_max * np.sqrt(rng.random(n))
    t = rng.uniform(0, 2 * np.pi, n)
    return np.stack([r * np.cos(t), r * np.sin(t)], axis=-1)


def random_polar_points(rng, n, r_min=0.1, r_max=6.0):
    return np.stack([rng.uniform(r_min, r_max, n), rng.uniform(0, 2 * np.pi, n)], axis=-1)
