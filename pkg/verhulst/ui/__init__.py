"""SVG rendering of CSV artifacts."""

from .svg import ChartKind, emit_svg, render_svg, write_svg

__all__ = ["ChartKind", "emit_svg", "render_svg", "write_svg"]
