import xml.etree.ElementTree as ET

import numpy as np
import pandas as pd
import pytest

from harness.experiments import BoundaryMap
from reports.heatmap import HeatmapTheme, render_heatmap, write_svg
from reports.tables import build_report, emit_boundary_map, emit_csv, load_boundary_map

SVG = "{http://www.w3.org/2000/svg}"


@pytest.fixture
def boundary():
    return BoundaryMap("simple_oscillator", ("a", "omega"), np.linspace(-0.5, 0.5, 3), np.linspace(-1, 1, 2),
                       np.array([[0.0, 0.5, 1.0], [0.1, 0.6, 0.9]]), 2,
                       [np.array([[0.0, -1.0], [0.0, 1.0]])], np.array([[0, 1, 1], [0, 1, 1]]))


class TestHeatmap:
    def test_colors(self):
        assert HeatmapTheme.color(0.5) == "#ffffff"
        assert HeatmapTheme.color(0.0) == HeatmapTheme.POINT
        assert HeatmapTheme.color(1.0) == HeatmapTheme.CYCLE
        assert HeatmapTheme.color(7.0) == HeatmapTheme.CYCLE

    def test_structure(self):
        matrix = np.array([[0.0, 1.0], [0.5, 0.5], [1.0, 0.0]])
        document = render_heatmap(matrix, [0.0, 1.0], [0.0, 1.0, 2.0], [np.array([[0.0, 0.0], [1.0, 2.0]])],
                                  title="t", axis_labels=("x", "y"), metadata={"config_hash": "abc", "seed": "3"})
        root = ET.fromstring(document)
        cells = root.find(f"{SVG}g[@id='cells']").findall(f"{SVG}rect")
        assert len(cells) == 6
        # row 0 is drawn lowest
        assert float(cells[0].get("y")) > float(cells[-1].get("y"))
        assert cells[0].get("fill") == HeatmapTheme.POINT
        assert len(root.find(f"{SVG}g[@id='overlay']").findall(f"{SVG}polyline")) == 1
        assert root.find(f"{SVG}desc").text == "config_hash=abc; seed=3"

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            render_heatmap(np.zeros((2, 3)), [0, 1], [0, 1])
        with pytest.raises(ValueError):
            render_heatmap(np.array([[np.nan]]), [0], [0])

    def test_write(self, tmp_path):
        path = write_svg(render_heatmap(np.ones((1, 1)), [0], [0]), tmp_path / "deep" / "map.svg")
        assert path.read_text(encoding="utf-8").startswith("<svg")


class TestTables:
    def test_emit_csv(self, tmp_path):
        table = pd.DataFrame({"system": ["so, plain", "vdp"], "accuracy_mean": [0.5, 1.0]})
        path = emit_csv(table, tmp_path / "t.csv", "abc")
        raw = path.read_bytes()
        assert raw.startswith(b"system,accuracy_mean,config_hash\r\n")
        assert b'"so, plain",0.5,abc\r\n' in raw
        assert b"\n" not in raw.replace(b"\r\n", b"")

    def test_boundary_map_artifacts(self, tmp_path, boundary):
        paths = emit_boundary_map(boundary, tmp_path, "boundary-so", "abc", seed=4)
        assert [p.name for p in paths] == ["boundary-so.map.json", "boundary-so.csv", "boundary-so.svg"]
        loaded, config_hash = load_boundary_map(paths[0])
        assert config_hash == "abc"
        np.testing.assert_array_equal(loaded.values, boundary.values)
        assert "seed=4" in paths[2].read_text(encoding="utf-8")

    def test_build_report(self, tmp_path, boundary):
        emit_boundary_map(boundary, tmp_path, "boundary-so", "abc")
        (tmp_path / "boundary-so.svg").unlink()
        emit_csv(pd.DataFrame({"experiment": ["accuracy"] * 2, "system": ["so", "so"],
                               "method": ["model", "model"], "accuracy_mean": [0.6, 0.8]}), tmp_path / "acc.csv")
        written = build_report(tmp_path)
        assert (tmp_path / "boundary-so.svg").exists()
        summary = pd.read_csv(tmp_path / "summary.csv")
        assert summary.loc[summary["source"] == "acc.csv", "accuracy_mean"].tolist() == [pytest.approx(0.7)]
        assert tmp_path / "summary.csv" in written
