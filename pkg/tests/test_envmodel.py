import json
import math
import random

import numpy as np
import pytest

from ctmap import envmodel
from ctmap.envmodel import (BaseStation, Environment, Rect,
                            generate_random_environment, is_blocked,
                            load_environment, segment_blocked)
from ctmap.errors import PlacementError, SchemaError, ValidationError


def scene_doc(**overrides):
    doc = {
        "width_m": 100.0, "height_m": 80.0, "resolution_m": 1.0,
        "buildings": [],
        "stations": [{"id": "bs0", "x_m": 50.0, "y_m": 40.0}],
    }
    doc.update(overrides)
    return doc


class TestLoadEnvironment:
    def test_open_field_valid(self):
        env, stations = load_environment(json.dumps(scene_doc()))
        assert env.buildings == ()
        assert stations[0].x_m == 50.0
        assert stations[0].frequency_ghz == 3.9

    def test_inverted_rectangle_rejected(self):
        doc = scene_doc(buildings=[
            {"x_min": 100, "y_min": 10, "x_max": 50, "y_max": 20}])
        with pytest.raises(ValidationError, match="x_min < x_max violated"):
            load_environment(json.dumps(doc))

    def test_paper_scale_scene(self):
        env, stations = generate_random_environment(
            seed=11, width_m=700, height_m=600, n_blocks=25,
            block_size_range=(20, 60), n_stations=4)
        text = json.dumps(envmodel.environment_to_dict(env, stations))
        env2, stations2 = load_environment(text)
        assert (env2.width_m, env2.height_m) == (700, 600)
        assert len(env2.buildings) == 25
        assert len(stations2) == 4
        assert all(s.frequency_ghz == 3.9 for s in stations2)

    def test_missing_field(self):
        doc = scene_doc()
        del doc["width_m"]
        with pytest.raises(SchemaError, match="width_m"):
            load_environment(json.dumps(doc))

    def test_mistyped_field(self):
        with pytest.raises(SchemaError, match="buildings"):
            load_environment(json.dumps(scene_doc(buildings="oops")))

    def test_station_inside_building(self):
        doc = scene_doc(buildings=[
            {"x_min": 40, "y_min": 30, "x_max": 60, "y_max": 50}])
        with pytest.raises(ValidationError, match="bs0"):
            load_environment(json.dumps(doc))

    def test_overlapping_buildings(self):
        doc = scene_doc(buildings=[
            {"x_min": 0, "y_min": 0, "x_max": 20, "y_max": 20},
            {"x_min": 10, "y_min": 10, "x_max": 30, "y_max": 30}])
        with pytest.raises(ValidationError, match="overlaps"):
            load_environment(json.dumps(doc))

    def test_building_out_of_bounds(self):
        doc = scene_doc(buildings=[
            {"x_min": 90, "y_min": 10, "x_max": 120, "y_max": 20}])
        with pytest.raises(ValidationError, match="outside"):
            load_environment(json.dumps(doc))


class TestGenerateRandom:
    def test_open_field(self):
        env, stations = generate_random_environment(7, n_blocks=0, n_stations=1)
        assert env.buildings == ()
        assert len(stations) == 1
        assert not is_blocked(env, stations[0].x_m, stations[0].y_m)

    def test_deterministic_documents(self, tmp_path):
        paths = []
        for i in range(2):
            env, stations = generate_random_environment(7, n_blocks=5, n_stations=2)
            p = tmp_path / f"scene{i}.json"
            envmodel.save_environment_file(env, stations, p)
            paths.append(p.read_bytes())
        assert paths[0] == paths[1]

    def test_pairwise_disjoint(self):
        env, _ = generate_random_environment(
            42, width_m=700, height_m=600, n_blocks=25,
            block_size_range=(20, 60), n_stations=4)
        blds = env.buildings
        assert len(blds) == 25
        for i in range(len(blds)):
            for j in range(i + 1, len(blds)):
                a, b = blds[i], blds[j]
                overlap_w = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
                overlap_h = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
                assert overlap_w <= 0 or overlap_h <= 0

    def test_retry_budget_exhausted(self):
        # far more blocks than can fit
        with pytest.raises(PlacementError):
            generate_random_environment(1, width_m=50, height_m=50,
                                        n_blocks=100, block_size_range=(20, 30),
                                        n_stations=0)


class TestIsBlocked:
    def test_out_of_bounds(self):
        env = Environment()
        assert is_blocked(env, -1, 5)

    def test_open_field_free(self):
        env = Environment()
        assert not is_blocked(env, 350, 300)

    def test_interior_and_edge(self):
        env = Environment(buildings=(Rect(100, 100, 200, 200),))
        assert is_blocked(env, 150, 150)
        assert not is_blocked(env, 100, 150)  # boundary is free


class TestSegmentBlocked:
    def test_zero_length_free(self):
        env = Environment(buildings=(Rect(100, 100, 200, 200),))
        assert not segment_blocked(env, (50, 50), (50, 50))

    def test_through_center(self):
        env = Environment(buildings=(Rect(100, 100, 200, 200),))
        assert segment_blocked(env, (50, 150), (250, 150))

    def test_tangent_edge_does_not_block(self):
        env = Environment(buildings=(Rect(100, 100, 200, 200),))
        assert not segment_blocked(env, (50, 100), (250, 100))

    def test_symmetry(self):
        env, _ = generate_random_environment(5, width_m=100, height_m=100,
                                             n_blocks=6, block_size_range=(10, 25),
                                             n_stations=0)
        rng = random.Random(9)
        for _ in range(50):
            a = (rng.uniform(0, 100), rng.uniform(0, 100))
            b = (rng.uniform(0, 100), rng.uniform(0, 100))
            assert segment_blocked(env, a, b) == segment_blocked(env, b, a)

    def test_blocked_midpoint_implies_blocked_segment(self):
        env, _ = generate_random_environment(5, width_m=100, height_m=100,
                                             n_blocks=6, block_size_range=(10, 25),
                                             n_stations=0)
        rng = random.Random(10)
        hits = 0
        for _ in range(200):
            a = (rng.uniform(0, 100), rng.uniform(0, 100))
            b = (rng.uniform(0, 100), rng.uniform(0, 100))
            mid = ((a[0] + b[0]) / 2, (a[1] + b[1]) / 2)
            if is_blocked(env, *mid):
                hits += 1
                assert segment_blocked(env, a, b)
        assert hits > 0

    def test_dense_sampling_oracle(self):
        env, _ = generate_random_environment(13, width_m=100, height_m=100,
                                             n_blocks=8, block_size_range=(10, 25),
                                             n_stations=0)
        rng = random.Random(3)
        for _ in range(20):
            a = (rng.uniform(0, 100), rng.uniform(0, 100))
            b = (rng.uniform(0, 100), rng.uniform(0, 100))
            length = math.dist(a, b)
            n = max(2, int(length / 0.01))
            ts = np.linspace(0.0, 1.0, n)
            xs = a[0] + ts * (b[0] - a[0])
            ys = a[1] + ts * (b[1] - a[1])
            inside = np.zeros(n, dtype=bool)
            for bld in env.buildings:
                inside |= ((xs > bld.x_min) & (xs < bld.x_max)
                           & (ys > bld.y_min) & (ys < bld.y_max))
            sampled = bool(inside.any())
            assert segment_blocked(env, a, b) == sampled
