"""Deterministic SVG rendering of planar tessellation snapshots.

One rect or polygon element per cell, emitted in cell-id order with
coordinates at 9 significant digits, so renders of the same snapshot are
byte-identical.  Cells can be flat or colored by birth time (early cells
light, late cells dark).
"""

from __future__ import annotations

from dataclasses import dataclass

from .division import TessellationSnapshot
from .geometry import Box, GeometryError

__all__ = ["SvgStyle", "render_svg"]


@dataclass(frozen=True)
class SvgStyle:
    width_px: float = 640.0
    pad_px: float = 10.0
    stroke: str = "#202020"
    stroke_width: float = 1.0
    fill_mode: str = "none"  # "none" | "birth"
    background: str = "#ffffff"


_EARLY = (0xF2, 0xF0, 0xEB)
_LATE = (0x2B, 0x5D, 0x8A)


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def _birth_color(birth: float, t: float) -> str:
    w = 0.0 if t <= 0.0 else min(1.0, birth / t)
    rgb = tuple(round(a + w * (b - a)) for a, b in zip(_EARLY, _LATE))
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def _bounds(geom) -> tuple[float, float, float, float]:
    if isinstance(geom, Box):
        return geom.lower[0], geom.lower[1], geom.upper[0], geom.upper[1]
    xs = [v[0] for v in geom.vertices]
    ys = [v[1] for v in geom.vertices]
    return min(xs), min(ys), max(xs), max(ys)


def render_svg(snapshot: TessellationSnapshot, style: SvgStyle = SvgStyle()) -> str:
    """Render a planar snapshot as an SVG 1.1 document string."""
    cells = sorted(snapshot.cells, key=lambda c: c.id)
    if not cells:
        raise GeometryError("empty snapshot")
    if any(c.geometry.dim != 2 for c in cells):
        raise GeometryError("SVG rendering is planar only (d = 2)")
    boxes = [_bounds(c.geometry) for c in cells]
    ref = snapshot.window if snapshot.window is not None else None
    if ref is not None:
        x0, y0, x1, y1 = _bounds(ref)
    else:
        x0 = min(b[0] for b in boxes)
        y0 = min(b[1] for b in boxes)
        x1 = max(b[2] for b in boxes)
        y1 = max(b[3] for b in boxes)
    span_x = x1 - x0
    span_y = y1 - y0
    scale = (style.width_px - 2 * style.pad_px) / span_x
    height_px = span_y * scale + 2 * style.pad_px

    def sx(x: float) -> float:
        return style.pad_px + (x - x0) * scale

    def sy(y: float) -> float:
        # SVG y grows downward
        return style.pad_px + (y1 - y) * scale

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_fmt(style.width_px)}" height="{_fmt(height_px)}" '
        f'viewBox="0 0 {_fmt(style.width_px)} {_fmt(height_px)}">',
        f'<rect x="0" y="0" width="{_fmt(style.width_px)}" height="{_fmt(height_px)}" '
        f'fill="{style.background}"/>',
    ]
    for c in cells:
        fill = _birth_color(c.birth, snapshot.time) if style.fill_mode == "birth" else "none"
        common = f'fill="{fill}" stroke="{style.stroke}" stroke-width="{_fmt(style.stroke_width)}"'
        g = c.geometry
        if isinstance(g, Box):
            bx0, by0, bx1, by1 = _bounds(g)
            parts.append(
                f'<rect id="cell{c.id}" x="{_fmt(sx(bx0))}" y="{_fmt(sy(by1))}" '
                f'width="{_fmt((bx1 - bx0) * scale)}" height="{_fmt((by1 - by0) * scale)}" {common}/>'
            )
        else:
            pts = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in g.vertices)
            parts.append(f'<polygon id="cell{c.id}" points="{pts}" {common}/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
