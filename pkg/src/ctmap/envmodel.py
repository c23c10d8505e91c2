"""2-D urban scene model: building footprints, base stations, blockage tests.

Geometry conventions: free space is closed, obstacle interiors are open.
A point sitting exactly on a building edge is traversable, and a segment
sliding tangentially along an edge does not count as blocked. This keeps
corridors between touching building layouts passable.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field

from .errors import PlacementError, SchemaError, ValidationError


@dataclass(frozen=True)
class Rect:
    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def contains_interior(self, x, y):
        return self.x_min < x < self.x_max and self.y_min < y < self.y_max

    def overlaps_interior(self, other):
        return (self.x_min < other.x_max and other.x_min < self.x_max
                and self.y_min < other.y_max and other.y_min < self.y_max)


@dataclass(frozen=True)
class BaseStation:
    id: str
    x_m: float
    y_m: float
    height_m: float = 10.0
    tx_power_dbm: float = 30.0
    frequency_ghz: float = 3.9


@dataclass(frozen=True)
class Environment:
    width_m: float = 700.0
    height_m: float = 600.0
    buildings: tuple = field(default_factory=tuple)
    resolution_m: float = 1.0


def _check_rect(rect, label):
    if not rect.x_min < rect.x_max:
        raise ValidationError(f"{label}: x_min < x_max violated "
                              f"({rect.x_min} >= {rect.x_max})")
    if not rect.y_min < rect.y_max:
        raise ValidationError(f"{label}: y_min < y_max violated "
                              f"({rect.y_min} >= {rect.y_max})")


def validate_environment(env, stations):
    """Check all scene invariants; raise ValidationError naming the offender."""
    if env.width_m <= 0 or env.height_m <= 0 or env.resolution_m <= 0:
        raise ValidationError("environment dimensions and resolution must be positive")
    for i, b in enumerate(env.buildings):
        _check_rect(b, f"building[{i}]")
        if b.x_min < 0 or b.y_min < 0 or b.x_max > env.width_m or b.y_max > env.height_m:
            raise ValidationError(f"building[{i}] extends outside environment bounds")
    for i, a in enumerate(env.buildings):
        for j in range(i + 1, len(env.buildings)):
            if a.overlaps_interior(env.buildings[j]):
                raise ValidationError(f"building[{i}] overlaps building[{j}]")
    for st in stations:
        if not (0 <= st.x_m <= env.width_m and 0 <= st.y_m <= env.height_m):
            raise ValidationError(f"station {st.id!r} outside environment bounds")
        for i, b in enumerate(env.buildings):
            if b.contains_interior(st.x_m, st.y_m):
                raise ValidationError(f"station {st.id!r} inside building[{i}]")
        if st.frequency_ghz <= 0:
            raise ValidationError(f"station {st.id!r}: frequency_ghz must be > 0")
        if not math.isfinite(st.tx_power_dbm):
            raise ValidationError(f"station {st.id!r}: tx_power_dbm must be finite")


def is_blocked(env, x_m, y_m):
    """True iff (x,y) is out of bounds or strictly inside a building."""
    if x_m < 0 or y_m < 0 or x_m > env.width_m or y_m > env.height_m:
        return True
    for b in env.buildings:
        if b.contains_interior(x_m, y_m):
            return True
    return False


def _segment_hits_rect_interior(ax, ay, bx, by, rect):
    """Exact open-segment vs open-rectangle intersection (Liang-Barsky clip)."""
    dx = bx - ax
    dy = by - ay
    if dx == 0.0 and dy == 0.0:
        return rect.contains_interior(ax, ay)
    t0, t1 = 0.0, 1.0
    for p, q in ((-dx, ax - rect.x_min), (dx, rect.x_max - ax),
                 (-dy, ay - rect.y_min), (dy, rect.y_max - ay)):
        if p == 0.0:
            if q < 0.0:
                return False
        else:
            t = q / p
            if p < 0.0:
                if t > t1:
                    return False
                if t > t0:
                    t0 = t
            else:
                if t < t0:
                    return False
                if t < t1:
                    t1 = t
    if t1 <= t0:
        # single touch point (corner graze) does not block
        return False
    tm = 0.5 * (t0 + t1)
    return rect.contains_interior(ax + tm * dx, ay + tm * dy)


def segment_blocked(env, a, b):
    """True iff the open segment a-b crosses any building interior."""
    ax, ay = a
    bx, by = b
    for rect in env.buildings:
        if _segment_hits_rect_interior(ax, ay, bx, by, rect):
            return True
    return False


# --- scene document (JSON) ---

_STATION_DEFAULTS = {"height_m": 10.0, "tx_power_dbm": 30.0, "frequency_ghz": 3.9}


def _require(doc, key, types, where):
    if key not in doc:
        raise SchemaError(f"{where}: missing field {key!r}")
    val = doc[key]
    if not isinstance(val, types) or isinstance(val, bool):
        raise SchemaError(f"{where}: field {key!r} has wrong type")
    return val


def environment_from_dict(doc):
    """Build (Environment, stations) from a parsed scene document."""
    num = (int, float)
    width = _require(doc, "width_m", num, "scene")
    height = _require(doc, "height_m", num, "scene")
    resolution = _require(doc, "resolution_m", num, "scene")
    raw_buildings = _require(doc, "buildings", list, "scene")
    raw_stations = _require(doc, "stations", list, "scene")

    buildings = []
    for i, b in enumerate(raw_buildings):
        if not isinstance(b, dict):
            raise SchemaError(f"buildings[{i}]: expected object")
        buildings.append(Rect(
            float(_require(b, "x_min", num, f"buildings[{i}]")),
            float(_require(b, "y_min", num, f"buildings[{i}]")),
            float(_require(b, "x_max", num, f"buildings[{i}]")),
            float(_require(b, "y_max", num, f"buildings[{i}]")),
        ))
    stations = []
    for i, s in enumerate(raw_stations):
        if not isinstance(s, dict):
            raise SchemaError(f"stations[{i}]: expected object")
        sid = _require(s, "id", str, f"stations[{i}]")
        stations.append(BaseStation(
            id=sid,
            x_m=float(_require(s, "x_m", num, f"stations[{i}]")),
            y_m=float(_require(s, "y_m", num, f"stations[{i}]")),
            height_m=float(s.get("height_m", _STATION_DEFAULTS["height_m"])),
            tx_power_dbm=float(s.get("tx_power_dbm", _STATION_DEFAULTS["tx_power_dbm"])),
            frequency_ghz=float(s.get("frequency_ghz", _STATION_DEFAULTS["frequency_ghz"])),
        ))
    env = Environment(width_m=float(width), height_m=float(height),
                      buildings=tuple(buildings), resolution_m=float(resolution))
    validate_environment(env, stations)
    return env, stations


def load_environment(text):
    """Parse and validate a JSON scene document string."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"scene is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("scene: top level must be an object")
    return environment_from_dict(doc)


def load_environment_file(path):
    with open(path, "r", encoding="utf-8") as fh:
        return load_environment(fh.read())


def environment_to_dict(env, stations):
    return {
        "width_m": env.width_m,
        "height_m": env.height_m,
        "resolution_m": env.resolution_m,
        "buildings": [
            {"x_min": b.x_min, "y_min": b.y_min, "x_max": b.x_max, "y_max": b.y_max}
            for b in env.buildings
        ],
        "stations": [
            {"id": s.id, "x_m": s.x_m, "y_m": s.y_m, "height_m": s.height_m,
             "tx_power_dbm": s.tx_power_dbm, "frequency_ghz": s.frequency_ghz}
            for s in stations
        ],
    }


def save_environment_file(env, stations, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(environment_to_dict(env, stations), fh, indent=2, sort_keys=True)
        fh.write("\n")


# --- random generation ---

RETRY_BUDGET = 1000


def generate_random_environment(seed, width_m=700.0, height_m=600.0,
                                resolution_m=1.0, n_blocks=25,
                                block_size_range=(20.0, 60.0), n_stations=4,
                                station_kwargs=None):
    """Deterministically generate a random scene from (seed, params).

    Blocks are placed without overlap; each placement gets RETRY_BUDGET
    attempts before PlacementError.
    """
    if width_m <= 0 or height_m <= 0 or resolution_m <= 0:
        raise ValidationError("environment dimensions and resolution must be positive")
    if n_blocks < 0 or n_stations < 0:
        raise ValidationError("block and station counts must be non-negative")
    lo, hi = block_size_range
    if lo <= 0 or hi < lo:
        raise ValidationError("block size range must be positive and ordered")

    rng = random.Random(seed)
    buildings = []
    for i in range(n_blocks):
        placed = False
        for _ in range(RETRY_BUDGET):
            w = rng.uniform(lo, hi)
            h = rng.uniform(lo, hi)
            if w >= width_m or h >= height_m:
                continue
            x = rng.uniform(0.0, width_m - w)
            y = rng.uniform(0.0, height_m - h)
            cand = Rect(x, y, x + w, y + h)
            if all(not cand.overlaps_interior(b) for b in buildings):
                buildings.append(cand)
                placed = True
                break
        if not placed:
            raise PlacementError(f"could not place block {i} within {RETRY_BUDGET} attempts")

    env = Environment(width_m=width_m, height_m=height_m,
                      buildings=tuple(buildings), resolution_m=resolution_m)

    station_kwargs = station_kwargs or {}
    stations = []
    for i in range(n_stations):
        for _ in range(RETRY_BUDGET):
            x = rng.uniform(0.0, width_m)
            y = rng.uniform(0.0, height_m)
            if not is_blocked(env, x, y):
                stations.append(BaseStation(id=f"bs{i}", x_m=x, y_m=y, **station_kwargs))
                break
        else:
            raise PlacementError(f"could not place station {i} within {RETRY_BUDGET} attempts")

    validate_environment(env, stations)
    return env, stations
