"""Self-contained SVG charts rendered straight from CSV artifacts."""

from __future__ import annotations

import logging
import math
import xml.etree.ElementTree as ET
from enum import Enum
from pathlib import Path
from typing import List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from ..analysis.density import DENSITY_COLUMNS
from ..config.defaults import DEFAULT_THEME_COLORS
from ..core.errors import ArtifactError, SchemaError
from ..core.tables import read_table

logger = logging.getLogger(__name__)

SVG_NS = "http://www.w3.org/2000/svg"
WIDTH = 640
HEIGHT = 480
MARGINS = {"top": 40, "bottom": 50, "left": 70, "right": 20}
TICKS = 5


class ChartKind(str, Enum):
    LINE = "line"
    HISTOGRAM = "histogram"


def kind_for_header(header: Sequence[str]) -> ChartKind:
    return ChartKind.HISTOGRAM if tuple(header) == DENSITY_COLUMNS else ChartKind.LINE


def _num(value: float) -> str:
    return f"{value:.2f}"


def _tick(value: float) -> str:
    return f"{value:.3g}"


def _span(values: np.ndarray) -> Tuple[float, float]:
    finite = values[np.isfinite(values)]
    if finite.size == 0:
        return 0.0, 1.0
    lo, hi = float(np.min(finite)), float(np.max(finite))
    if hi == lo:
        pad = max(1.0, abs(lo)) * 0.5
        return lo - pad, hi + pad
    return lo, hi


class _Frame:
    """Maps data coordinates into the plotting rectangle."""

    def __init__(self, x_range: Tuple[float, float], y_range: Tuple[float, float]) -> None:
        self.x0, self.x1 = x_range
        self.y0, self.y1 = y_range
        self.left = MARGINS["left"]
        self.right = WIDTH - MARGINS["right"]
        self.top = MARGINS["top"]
        self.bottom = HEIGHT - MARGINS["bottom"]

    def x(self, value: float) -> float:
        return self.left + (value - self.x0) / (self.x1 - self.x0) * (self.right - self.left)

    def y(self, value: float) -> float:
        return self.bottom - (value - self.y0) / (self.y1 - self.y0) * (self.bottom - self.top)


def _text(parent: ET.Element, x: float, y: float, content: str, colors: Mapping, **attrs: str) -> ET.Element:
    node = ET.SubElement(
        parent,
        "text",
        {"x": _num(x), "y": _num(y), "fill": colors["axes"], "font-family": "monospace", "font-size": "12", **attrs},
    )
    node.text = content
    return node


def _axes(root: ET.Element, frame: _Frame, x_label: str, y_label: str, title: str, colors: Mapping) -> None:
    group = ET.SubElement(root, "g", {"id": "axes", "stroke": colors["axes"], "stroke-width": "1"})
    ET.SubElement(group, "line", {"x1": _num(frame.left), "y1": _num(frame.bottom), "x2": _num(frame.right), "y2": _num(frame.bottom)})
    ET.SubElement(group, "line", {"x1": _num(frame.left), "y1": _num(frame.top), "x2": _num(frame.left), "y2": _num(frame.bottom)})
    labels = ET.SubElement(root, "g", {"id": "labels"})
    for i in range(TICKS + 1):
        fraction = i / TICKS
        xv = frame.x0 + fraction * (frame.x1 - frame.x0)
        yv = frame.y0 + fraction * (frame.y1 - frame.y0)
        px, py = frame.x(xv), frame.y(yv)
        ET.SubElement(group, "line", {"x1": _num(px), "y1": _num(frame.bottom), "x2": _num(px), "y2": _num(frame.bottom + 4)})
        ET.SubElement(group, "line", {"x1": _num(frame.left - 4), "y1": _num(py), "x2": _num(frame.left), "y2": _num(py)})
        _text(labels, px, frame.bottom + 16, _tick(xv), colors, **{"text-anchor": "middle"})
        _text(labels, frame.left - 6, py + 4, _tick(yv), colors, **{"text-anchor": "end"})
    _text(labels, (frame.left + frame.right) / 2, HEIGHT - 10, x_label, colors, **{"text-anchor": "middle"})
    _text(
        labels,
        16,
        (frame.top + frame.bottom) / 2,
        y_label,
        colors,
        **{"text-anchor": "middle", "transform": f"rotate(-90 16 {_num((frame.top + frame.bottom) / 2)})"},
    )
    _text(labels, (frame.left + frame.right) / 2, 24, title, colors, **{"text-anchor": "middle", "font-size": "14"})


def _segments(x: np.ndarray, y: np.ndarray) -> List[List[Tuple[float, float]]]:
    """Split a series at non-finite points."""

    runs: List[List[Tuple[float, float]]] = [[]]
    for xi, yi in zip(x, y):
        if math.isfinite(xi) and math.isfinite(yi):
            runs[-1].append((float(xi), float(yi)))
        elif runs[-1]:
            runs.append([])
    return [run for run in runs if run]


def render_svg(
    header: Sequence[str],
    rows: np.ndarray,
    kind: Union[str, ChartKind],
    *,
    title: str = "",
    colors: Optional[Mapping] = None,
) -> str:
    """Render parsed CSV rows as an SVG document string."""

    chart = ChartKind(kind)
    palette = dict(DEFAULT_THEME_COLORS if colors is None else colors)
    header = list(header)
    rows = np.asarray(rows, dtype=float).reshape(-1, len(header)) if header else np.empty((0, 0))

    if chart is ChartKind.HISTOGRAM:
        if tuple(header) != DENSITY_COLUMNS:
            raise SchemaError(f"histogram needs columns {list(DENSITY_COLUMNS)}, got {header}")
        left, right, height = rows[:, 0], rows[:, 1], rows[:, 2]
        x_range = _span(np.concatenate([left, right]))
        y_range = (0.0, _span(height)[1] if height.size else 1.0)
        x_label, y_label = "x", header[2]
    else:
        if len(header) < 2:
            raise SchemaError(f"line chart needs at least two columns, got {header}")
        x_range = _span(rows[:, 0])
        y_range = _span(rows[:, 1])
        x_label, y_label = header[0], header[1]

    frame = _Frame(x_range, y_range)
    root = ET.Element(
        "svg",
        {
            "xmlns": SVG_NS,
            "width": str(WIDTH),
            "height": str(HEIGHT),
            "viewBox": f"0 0 {WIDTH} {HEIGHT}",
        },
    )
    ET.SubElement(root, "rect", {"width": str(WIDTH), "height": str(HEIGHT), "fill": palette["background"]})
    _axes(root, frame, x_label, y_label, title, palette)

    series_color = palette["series"][0]
    data = ET.SubElement(root, "g", {"id": "data"})
    if chart is ChartKind.HISTOGRAM:
        for lo, hi, value in rows:
            if not math.isfinite(value) or value <= 0:
                continue
            x_left, x_right = frame.x(lo), frame.x(hi)
            y_top = frame.y(value)
            ET.SubElement(
                data,
                "rect",
                {
                    "x": _num(x_left),
                    "y": _num(y_top),
                    "width": _num(max(x_right - x_left, 0.0)),
                    "height": _num(frame.bottom - y_top),
                    "fill": series_color,
                },
            )
    else:
        for run in _segments(rows[:, 0], rows[:, 1]):
            points = " ".join(f"{_num(frame.x(a))},{_num(frame.y(b))}" for a, b in run)
            ET.SubElement(
                data,
                "polyline",
                {"points": points, "fill": "none", "stroke": series_color, "stroke-width": "1.5"},
            )
    return ET.tostring(root, encoding="unicode")


def emit_svg(artifact: Union[str, Path], kind: Optional[Union[str, ChartKind]] = None) -> str:
    """Read a CSV artifact and render it; ``kind=None`` picks it from the header.

    The title is the file stem (the scenario name).
    """

    path = Path(artifact)
    header, rows = read_table(path)
    chosen = kind_for_header(header) if kind is None else ChartKind(kind)
    return render_svg(header, rows, chosen, title=path.stem)


def write_svg(artifact: Union[str, Path], kind: Optional[Union[str, ChartKind]] = None) -> Path:
    """Write ``<artifact>.svg`` next to the CSV and return its path."""

    source = Path(artifact)
    target = source.with_suffix(".svg")
    document = emit_svg(source, kind)
    try:
        target.write_text(document + "\n", encoding="utf8")
    except OSError as exc:
        raise ArtifactError(f"unable to write '{target}': {exc}") from exc
    logger.debug("Rendered %s", target)
    return target


__all__ = ["ChartKind", "emit_svg", "kind_for_header", "render_svg", "write_svg"]
