import xml.etree.ElementTree as ET

import numpy as np
import pytest

from conftest import make_cov
from ctmap.errors import CTMapError
from ctmap.gridgraph import build_graph
from ctmap.render import BUILDING_COLOR, render_svg, render_svg_file
from ctmap.routing import plan_shortest, plan_signal_aware

SVG_NS = "{http://www.w3.org/2000/svg}"


@pytest.fixture
def scene():
    rng = np.random.default_rng(41)
    blocked = np.zeros((12, 16), bool)
    blocked[4:8, 6:9] = True
    cov = make_cov(rng.uniform(-95, -45, size=(12, 16)), blocked)
    return cov, build_graph(cov)


class TestRenderSvg:
    def test_well_formed_xml(self, scene):
        cov, _ = scene
        root = ET.fromstring(render_svg(cov, cell_px=4))
        assert root.tag == f"{SVG_NS}svg"
        assert int(root.get("width")) == 16 * 4

    def test_buildings_dark_gray(self, scene):
        cov, _ = scene
        root = ET.fromstring(render_svg(cov))
        fills = {r.get("fill") for r in root.iter(f"{SVG_NS}rect")}
        assert BUILDING_COLOR in fills

    def test_three_route_polylines(self, scene):
        cov, g = scene
        r1 = plan_signal_aware(g, cov, (0, 0), (15, 11))
        r2 = plan_shortest(g, cov, (0, 0), (15, 11))
        r3 = plan_signal_aware(g, cov, (0, 11), (15, 0))
        text = render_svg(cov, routes=[(r1.cells, "red", "oracle"),
                                       (r2.cells, "orange", "shortest"),
                                       (r3.cells, "purple", "alt")], cell_px=3)
        root = ET.fromstring(text)
        lines = list(root.iter(f"{SVG_NS}polyline"))
        assert [p.get("stroke") for p in lines] == ["red", "orange", "purple"]
        assert [p.get("data-label") for p in lines] == ["oracle", "shortest", "alt"]
        first = lines[0].get("points").split()[0]
        assert first == f"{(0 + 0.5) * 3:g},{(0 + 0.5) * 3:g}"

    def test_route_outside_grid_rejected(self, scene):
        cov, _ = scene
        with pytest.raises(CTMapError, match="outside the grid"):
            render_svg(cov, routes=[([(0, 0), (99, 0)], "red", "bad")])

    def test_legend_labels_present(self, scene):
        cov, _ = scene
        text = render_svg(cov, ramp=(-100.0, -40.0))
        root = ET.fromstring(text)
        labels = [t.text for t in root.iter(f"{SVG_NS}text")]
        assert "-100.0 dBm" in labels
        assert "-40.0 dBm" in labels

    def test_bad_ramp(self, scene):
        cov, _ = scene
        with pytest.raises(CTMapError, match="ramp"):
            render_svg(cov, ramp=(-40.0, -40.0))

    def test_deterministic_file_output(self, scene, tmp_path):
        cov, _ = scene
        a, b = tmp_path / "a.svg", tmp_path / "b.svg"
        render_svg_file(cov, a, cell_px=2)
        render_svg_file(cov, b, cell_px=2)
        assert a.read_bytes() == b.read_bytes()
