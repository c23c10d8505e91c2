import numpy as np
import pytest

from ctmap.envmodel import BaseStation, Environment, Rect
from ctmap.propagation import BLOCKED_SENTINEL_DBM, CoverageMap


def make_cov(rss, blocked=None, resolution_m=1.0, station_count=1):
    """Synthetic CoverageMap from an explicit dBm grid (row-major)."""
    rss = np.asarray(rss, dtype=np.float32)
    rows, cols = rss.shape
    if blocked is None:
        blocked = np.zeros((rows, cols), dtype=bool)
    else:
        blocked = np.asarray(blocked, dtype=bool)
    rss = rss.copy()
    rss[blocked] = BLOCKED_SENTINEL_DBM
    return CoverageMap(cols=cols, rows=rows, resolution_m=resolution_m,
                       rss_dbm=rss, blocked=blocked,
                       station_count=station_count)


@pytest.fixture(scope="session", autouse=True)
def _warm_numba():
    from ctmap import _njit
    _njit.warmup()


@pytest.fixture
def open_field():
    env = Environment(width_m=40.0, height_m=30.0, buildings=(), resolution_m=1.0)
    stations = [BaseStation(id="bs0", x_m=20.0, y_m=15.0)]
    return env, stations


@pytest.fixture
def walled_scene():
    """One slab building splitting the scene, station above it."""
    env = Environment(width_m=60.0, height_m=40.0,
                      buildings=(Rect(10.0, 18.0, 50.0, 24.0),),
                      resolution_m=1.0)
    stations = [BaseStation(id="bs0", x_m=30.0, y_m=35.0)]
    return env, stations
