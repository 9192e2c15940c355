"""
reports/heatmap.py

Standalone SVG heatmaps of mean cycle predictions: a diverging scale (blue
for point, white at an even split, red for cycle), axis ticks, a color bar
and optional boundary polylines.
"""

import xml.etree.ElementTree as ET
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np
from matplotlib.colors import LinearSegmentedColormap, to_hex

from utils.errors import IoError
from utils.logging_utils import get_module_logger

# Get module logger
log = get_module_logger()


class HeatmapTheme:
    """Colors and geometry of rendered heatmaps."""

    POINT = "#2166ac"
    EVEN = "#ffffff"
    CYCLE = "#b2182b"
    OVERLAY = "#000000"
    TEXT = "#222222"
    FRAME = "#555555"
    FONT = "sans-serif"

    # Odd lookup size so 0.5 lands exactly on the white entry
    COLORMAP = LinearSegmentedColormap.from_list("cycle_share", [POINT, EVEN, CYCLE], N=257)

    PLOT_SIZE = 400
    MARGIN_LEFT = 70
    MARGIN_TOP = 40
    MARGIN_BOTTOM = 60
    COLORBAR_GAP = 20
    COLORBAR_WIDTH = 16
    COLORBAR_STEPS = 21
    MARGIN_RIGHT = 90
    TICKS = 5

    @classmethod
    def color(cls, value: float) -> str:
        return to_hex(cls.COLORMAP(float(np.clip(value, 0.0, 1.0))))


@dataclass(frozen=True)
class PlotBox:
    """Affine map from data coordinates to SVG pixels (y grows downwards)."""

    x_range: Tuple[float, float]
    y_range: Tuple[float, float]
    left: float
    top: float
    width: float
    height: float

    def to_plot(self, x, y) -> Tuple[np.ndarray, np.ndarray]:
        (x0, x1), (y0, y1) = self.x_range, self.y_range
        px = self.left + (np.asarray(x, dtype=np.float64) - x0) / (x1 - x0) * self.width
        py = self.top + self.height - (np.asarray(y, dtype=np.float64) - y0) / (y1 - y0) * self.height
        return px, py


def _cell_edges(axis: np.ndarray) -> Tuple[float, float]:
    """Data range covered by cells centred on the axis values."""
    step = float(axis[1] - axis[0]) if len(axis) > 1 else 1.0
    return float(axis[0] - 0.5 * step), float(axis[-1] + 0.5 * step)


def plot_box(x_axis, y_axis) -> PlotBox:
    t = HeatmapTheme
    return PlotBox(_cell_edges(np.asarray(x_axis, dtype=np.float64)),
                   _cell_edges(np.asarray(y_axis, dtype=np.float64)),
                   t.MARGIN_LEFT, t.MARGIN_TOP, t.PLOT_SIZE, t.PLOT_SIZE)


def _fmt(value: float) -> str:
    return f"{value:.2f}"


def _text(parent: ET.Element, x: float, y: float, content: str, anchor: str = "middle",
          size: int = 11, **extra: str) -> ET.Element:
    node = ET.SubElement(parent, "text", {"x": _fmt(x), "y": _fmt(y), "text-anchor": anchor,
                                          "font-size": str(size), "font-family": HeatmapTheme.FONT,
                                          "fill": HeatmapTheme.TEXT, **extra})
    node.text = content
    return node


def render_heatmap(matrix, x_axis, y_axis, overlay: Optional[Sequence[np.ndarray]] = None,
                   title: str = "", axis_labels: Tuple[str, str] = ("", ""),
                   metadata: Optional[Dict[str, str]] = None) -> str:
    """
    Render a matrix of values in [0, 1] as an SVG document.

    Args:
        matrix: (len(y_axis), len(x_axis)) values; row 0 is drawn at the bottom
        x_axis, y_axis: Cell-centre coordinates
        overlay: Polylines of (n, 2) data points drawn over the cells
        title: Plot title
        axis_labels: (x label, y label)
        metadata: Key/value pairs embedded in the document (config hash, seeds)

    Returns:
        The SVG document as a string
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    x_axis = np.asarray(x_axis, dtype=np.float64)
    y_axis = np.asarray(y_axis, dtype=np.float64)
    if matrix.shape != (len(y_axis), len(x_axis)):
        raise ValueError(f"Matrix shape {matrix.shape} does not match axes ({len(y_axis)}, {len(x_axis)})")
    if not np.all(np.isfinite(matrix)):
        raise ValueError("Heatmap values must be finite")

    t = HeatmapTheme
    box = plot_box(x_axis, y_axis)
    total_w = t.MARGIN_LEFT + t.PLOT_SIZE + t.MARGIN_RIGHT
    total_h = t.MARGIN_TOP + t.PLOT_SIZE + t.MARGIN_BOTTOM
    svg = ET.Element("svg", {"xmlns": "http://www.w3.org/2000/svg", "width": str(total_w),
                             "height": str(total_h), "viewBox": f"0 0 {total_w} {total_h}"})
    if metadata:
        desc = ET.SubElement(svg, "desc")
        desc.text = "; ".join(f"{k}={metadata[k]}" for k in sorted(metadata))

    cells = ET.SubElement(svg, "g", {"id": "cells", "shape-rendering": "crispEdges"})
    cell_w = t.PLOT_SIZE / len(x_axis)
    cell_h = t.PLOT_SIZE / len(y_axis)
    rows, cols = matrix.shape
    for j in range(rows):
        for i in range(cols):
            ET.SubElement(cells, "rect", {"x": _fmt(box.left + i * cell_w),
                                          "y": _fmt(box.top + (rows - 1 - j) * cell_h),
                                          "width": _fmt(cell_w), "height": _fmt(cell_h),
                                          "fill": t.color(matrix[j, i])})

    ET.SubElement(svg, "rect", {"x": _fmt(box.left), "y": _fmt(box.top), "width": _fmt(box.width),
                                "height": _fmt(box.height), "fill": "none", "stroke": t.FRAME})

    if overlay:
        lines = ET.SubElement(svg, "g", {"id": "overlay", "fill": "none", "stroke": t.OVERLAY,
                                         "stroke-width": "2"})
        for line in overlay:
            line = np.asarray(line, dtype=np.float64).reshape(-1, 2)
            px, py = box.to_plot(line[:, 0], line[:, 1])
            points = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in zip(px, py))
            ET.SubElement(lines, "polyline", {"points": points})

    ticks = ET.SubElement(svg, "g", {"id": "ticks"})
    for value in np.linspace(*box.x_range, t.TICKS):
        px, _ = box.to_plot(value, box.y_range[0])
        bottom = box.top + box.height
        ET.SubElement(ticks, "line", {"x1": _fmt(px), "y1": _fmt(bottom), "x2": _fmt(px),
                                      "y2": _fmt(bottom + 5), "stroke": t.FRAME})
        _text(ticks, px, bottom + 18, f"{value:.3g}")
    for value in np.linspace(*box.y_range, t.TICKS):
        _, py = box.to_plot(box.x_range[0], value)
        ET.SubElement(ticks, "line", {"x1": _fmt(box.left - 5), "y1": _fmt(py), "x2": _fmt(box.left),
                                      "y2": _fmt(py), "stroke": t.FRAME})
        _text(ticks, box.left - 8, py + 4, f"{value:.3g}", anchor="end")

    x_label, y_label = axis_labels
    if x_label:
        _text(svg, box.left + box.width / 2, box.top + box.height + 45, x_label, size=13)
    if y_label:
        cx, cy = box.left - 50, box.top + box.height / 2
        _text(svg, cx, cy, y_label, size=13, transform=f"rotate(-90 {_fmt(cx)} {_fmt(cy)})")
    if title:
        _text(svg, box.left + box.width / 2, box.top - 15, title, size=14)

    bar = ET.SubElement(svg, "g", {"id": "colorbar"})
    bar_x = box.left + box.width + t.COLORBAR_GAP
    step_h = box.height / t.COLORBAR_STEPS
    for k, value in enumerate(np.linspace(0.0, 1.0, t.COLORBAR_STEPS)):
        ET.SubElement(bar, "rect", {"x": _fmt(bar_x), "y": _fmt(box.top + box.height - (k + 1) * step_h),
                                    "width": str(t.COLORBAR_WIDTH), "height": _fmt(step_h),
                                    "fill": t.color(value)})
    for value in (0.0, 0.5, 1.0):
        _text(bar, bar_x + t.COLORBAR_WIDTH + 6, box.top + box.height * (1 - value) + 4,
              f"{value:.1f}", anchor="start")

    return ET.tostring(svg, encoding="unicode")


def write_svg(document: str, path: Union[str, Path]) -> Path:
    """Write an SVG document; IoError when the file cannot be written."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(document, encoding="utf-8")
    except OSError as e:
        error_msg = f"Cannot write heatmap {path}: {e}"
        log.error(error_msg)
        raise IoError(error_msg) from e
    log.info(f"Wrote heatmap to {path}")
    return path
