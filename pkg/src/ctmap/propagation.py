"""Per-cell RSS coverage maps from an analytic log-distance path-loss model.

For each non-blocked cell center and station: d is the 3-D link distance
(station antenna height vs. a 1.5 m receiver) clamped below by
min_distance_m, PL(d) = 32.45 + 10*n*log10(d) + 20*log10(f_GHz) dB, plus a
fixed NLOS penalty when the 2-D line of sight crosses a building. The cell
keeps the best-server value max_k(tx_k - PL_k). Blocked cells carry the
-200 dBm sentinel and a parallel boolean mask; consumers must gate on the
mask, never on the sentinel magnitude.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .backend import resolve_backend
from .errors import FormatError, InvalidParams, NoStationError, OutOfBounds

RX_HEIGHT_M = 1.5
FSPL_CONST_DB = 32.45
BLOCKED_SENTINEL_DBM = -200.0

_MAGIC = b"CTMP"
_FORMAT_VERSION = 1


@dataclass(frozen=True)
class PropagationParams:
    nlos_penalty_db: float = 25.0
    path_loss_exponent: float = 2.0
    min_distance_m: float = 1.0
    shadowing_sigma_db: float = 0.0
    shadowing_seed: int = 0

    def validate(self):
        if self.nlos_penalty_db < 0:
            raise InvalidParams("nlos_penalty_db must be >= 0")
        if self.path_loss_exponent < 1:
            raise InvalidParams("path_loss_exponent must be >= 1")
        if self.min_distance_m <= 0:
            raise InvalidParams("min_distance_m must be > 0")
        if self.shadowing_sigma_db < 0:
            raise InvalidParams("shadowing_sigma_db must be >= 0")


@dataclass
class CoverageMap:
    cols: int
    rows: int
    resolution_m: float
    rss_dbm: np.ndarray  # float32, shape (rows, cols), row-major
    blocked: np.ndarray  # bool, shape (rows, cols)
    station_count: int
    provenance: dict = field(default_factory=dict)

    def in_grid(self, col, row):
        return 0 <= col < self.cols and 0 <= row < self.rows

    def __eq__(self, other):
        if not isinstance(other, CoverageMap):
            return NotImplemented
        return (self.cols == other.cols and self.rows == other.rows
                and self.resolution_m == other.resolution_m
                and self.station_count == other.station_count
                and np.array_equal(
                    self.rss_dbm.view(np.uint32), other.rss_dbm.view(np.uint32))
                and np.array_equal(self.blocked, other.blocked))


def path_loss_db(distance_m, frequency_ghz, exponent=2.0, min_distance_m=1.0):
    """Closed-form log-distance path loss (d in meters, f in GHz)."""
    d = max(distance_m, min_distance_m)
    return FSPL_CONST_DB + 10.0 * exponent * np.log10(d) + 20.0 * np.log10(frequency_ghz)


def _cell_centers(rows, cols, resolution):
    cy = (np.arange(rows, dtype=np.float64) + 0.5) * resolution
    cx = (np.arange(cols, dtype=np.float64) + 0.5) * resolution
    return np.meshgrid(cx, cy)  # each (rows, cols)


def _seg_blocked_grid(sx, sy, cx, cy, rects):
    """Vectorized open-segment vs rect-interior test, station -> every cell."""
    dx = cx - sx
    dy = cy - sy
    blocked = np.zeros(cx.shape, dtype=bool)
    deg = (dx == 0.0) & (dy == 0.0)
    for x0, y0, x1, y1 in rects:
        t0 = np.zeros_like(dx)
        t1 = np.ones_like(dx)
        parallel_out = np.zeros(cx.shape, dtype=bool)
        for p, q in ((-dx, sx - x0), (dx, x1 - sx), (-dy, sy - y0), (dy, y1 - sy)):
            nonzero = p != 0.0
            with np.errstate(divide="ignore", invalid="ignore"):
                t = np.where(nonzero, q / np.where(nonzero, p, 1.0), 0.0)
            parallel_out |= ~nonzero & (np.asarray(q) < 0.0)
            t0 = np.where(p < 0.0, np.maximum(t0, t), t0)
            t1 = np.where(p > 0.0, np.minimum(t1, t), t1)
        hit = ~parallel_out & (t1 > t0)
        tm = 0.5 * (t0 + t1)
        mx = sx + tm * dx
        my = sy + tm * dy
        hit &= (mx > x0) & (mx < x1) & (my > y0) & (my < y1)
        hit = np.where(deg, (cx > x0) & (cx < x1) & (cy > y0) & (cy < y1), hit)
        blocked |= hit
    return blocked


def _coverage_numpy(rows, cols, resolution, rects, stations, params):
    cx, cy = _cell_centers(rows, cols, resolution)
    best = np.full((rows, cols), -1e300)
    for st in stations:
        dz = st.height_m - RX_HEIGHT_M
        d = np.sqrt((cx - st.x_m) ** 2 + (cy - st.y_m) ** 2 + dz * dz)
        d = np.maximum(d, params.min_distance_m)
        pl = (FSPL_CONST_DB + 10.0 * params.path_loss_exponent * np.log10(d)
              + 20.0 * np.log10(st.frequency_ghz))
        if len(rects):
            nlos = _seg_blocked_grid(st.x_m, st.y_m, cx, cy, rects)
            pl = pl + params.nlos_penalty_db * nlos
        best = np.maximum(best, st.tx_power_dbm - pl)
    return best


def _blocked_mask(rows, cols, resolution, rects):
    cx, cy = _cell_centers(rows, cols, resolution)
    mask = np.zeros((rows, cols), dtype=bool)
    for x0, y0, x1, y1 in rects:
        mask |= (cx > x0) & (cx < x1) & (cy > y0) & (cy < y1)
    return mask


def compute_coverage(env, stations, params=None, backend=None):
    """Build the best-server CoverageMap for a scene."""
    if not stations:
        raise NoStationError("coverage requires at least one base station")
    params = params or PropagationParams()
    params.validate()
    backend = resolve_backend(backend)

    rows = int(np.ceil(env.height_m / env.resolution_m))
    cols = int(np.ceil(env.width_m / env.resolution_m))
    rects = [(b.x_min, b.y_min, b.x_max, b.y_max) for b in env.buildings]

    if backend == "numba":
        from . import _njit
        rect_arr = np.array(rects, dtype=np.float64).reshape(len(rects), 4)
        rss = _njit.coverage_kernel(
            rows, cols, float(env.resolution_m), rect_arr,
            np.array([s.x_m for s in stations], dtype=np.float64),
            np.array([s.y_m for s in stations], dtype=np.float64),
            np.array([s.height_m for s in stations], dtype=np.float64),
            np.array([s.tx_power_dbm for s in stations], dtype=np.float64),
            np.array([s.frequency_ghz for s in stations], dtype=np.float64),
            float(params.path_loss_exponent), float(params.min_distance_m),
            float(params.nlos_penalty_db))
    else:
        rss = _coverage_numpy(rows, cols, env.resolution_m, rects, stations, params)

    if params.shadowing_sigma_db > 0.0:
        # one draw per cell, keyed by cell index via the array layout
        rng = np.random.default_rng(params.shadowing_seed)
        rss = rss + rng.normal(0.0, params.shadowing_sigma_db, size=(rows, cols))

    blocked = _blocked_mask(rows, cols, env.resolution_m, rects)
    rss = rss.astype(np.float32)
    rss[blocked] = BLOCKED_SENTINEL_DBM

    return CoverageMap(
        cols=cols, rows=rows, resolution_m=float(env.resolution_m),
        rss_dbm=rss, blocked=blocked, station_count=len(stations),
        provenance={
            "nlos_penalty_db": params.nlos_penalty_db,
            "path_loss_exponent": params.path_loss_exponent,
            "min_distance_m": params.min_distance_m,
            "shadowing_sigma_db": params.shadowing_sigma_db,
            "shadowing_seed": params.shadowing_seed,
            "backend": backend,
        })


def rss_at(cov, col, row):
    """Stored per-cell RSS in dBm (sentinel for blocked cells)."""
    if not cov.in_grid(col, row):
        raise OutOfBounds(f"cell ({col}, {row}) outside {cov.cols}x{cov.rows} grid")
    return float(cov.rss_dbm[row, col])


# --- binary coverage file (magic CTMP) ---

_HEADER = struct.Struct("<4sHIIfH")


def save_coverage(cov, path):
    grid = np.ascontiguousarray(cov.rss_dbm, dtype="<f4")
    mask = np.ascontiguousarray(cov.blocked).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, _FORMAT_VERSION, cov.cols, cov.rows,
                              cov.resolution_m, cov.station_count))
        fh.write(grid.tobytes())
        fh.write(mask.tobytes())


def load_coverage(path):
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) < _HEADER.size:
            raise FormatError("truncated header")
        magic, version, cols, rows, resolution, station_count = _HEADER.unpack(header)
        if magic != _MAGIC:
            raise FormatError(f"bad magic bytes {magic!r}")
        if version != _FORMAT_VERSION:
            raise FormatError(f"unsupported format version {version}")
        n = rows * cols
        raw = fh.read(4 * n)
        if len(raw) < 4 * n:
            raise FormatError("truncated grid")
        rss = np.frombuffer(raw, dtype="<f4").reshape(rows, cols).copy()
        raw = fh.read(n)
        if len(raw) < n:
            raise FormatError("truncated blocked mask")
        if fh.read(1):
            raise FormatError("trailing bytes after blocked mask")
        blocked = np.frombuffer(raw, dtype=np.uint8).reshape(rows, cols).astype(bool)
    return CoverageMap(cols=cols, rows=rows, resolution_m=resolution,
                       rss_dbm=rss, blocked=blocked, station_count=station_count)
