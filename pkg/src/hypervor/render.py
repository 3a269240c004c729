"""Deterministic SVG rendering of disk-window tessellations in the Poincare disk."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .geometry import HPoint, to_disk
from .voronoi import Tessellation

__all__ = ["RenderSpec", "render_svg"]

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class RenderSpec:
    """Canvas geometry and styling for render_svg."""

    width_px: int = 800
    height_px: int = 800
    stroke_width: float = 1.2
    palette: tuple[str, str] = ("#000000", "#ffffff")
    show_nuclei: bool = False

    def __post_init__(self) -> None:
        for name, v in (("width_px", self.width_px), ("height_px", self.height_px)):
            if not isinstance(v, int) or not 64 <= v <= 8192:
                raise ValueError(f"{name} must be an integer in [64, 8192]")
        if not self.stroke_width > 0.0:
            raise ValueError("stroke_width must be positive")
        if len(self.palette) != 2:
            raise ValueError("palette must hold exactly two colors")


def _fmt(x: float) -> str:
    # fixed six decimals; normalize the negative-zero artifact so output
    # bytes do not depend on rounding direction
    s = f"{x:.6f}"
    return "0.000000" if s == "-0.000000" else s


class _Canvas:
    """Affine map from Poincare disk coordinates to pixel coordinates."""

    def __init__(self, spec: RenderSpec) -> None:
        self.cx = spec.width_px / 2.0
        self.cy = spec.height_px / 2.0
        self.scale = 0.49 * min(spec.width_px, spec.height_px)

    def px(self, z: tuple[float, float]) -> tuple[float, float]:
        return (self.cx + self.scale * z[0], self.cy - self.scale * z[1])


def _orthocenter(z1: tuple[float, float], z2: tuple[float, float]):
    """Center of the circle through z1, z2 orthogonal to the unit circle.

    Orthogonality pins 2 z . c = 1 + |z|^2 at both endpoints; a vanishing
    determinant means the geodesic runs through the origin (straight chord).
    """
    x1, y1 = z1
    x2, y2 = z2
    det = 4.0 * (x1 * y2 - y1 * x2)
    if abs(det) < 1e-12:
        return None
    b1 = 1.0 + x1 * x1 + y1 * y1
    b2 = 1.0 + x2 * x2 + y2 * y2
    cx = (2.0 * y2 * b1 - 2.0 * y1 * b2) / det
    cy = (2.0 * x1 * b2 - 2.0 * x2 * b1) / det
    return cx, cy


def _wall_piece(canvas: _Canvas, a: HPoint, b: HPoint, move: bool) -> str:
    """Path data from a to b along their geodesic, 'M' prefix optional."""
    za, zb = to_disk(a), to_disk(b)
    pa, pb = canvas.px(za), canvas.px(zb)
    head = f"M {_fmt(pa[0])} {_fmt(pa[1])} " if move else ""
    center = _orthocenter(za, zb)
    if center is None:
        return f"{head}L {_fmt(pb[0])} {_fmt(pb[1])}"
    r = canvas.scale * math.sqrt(center[0] ** 2 + center[1] ** 2 - 1.0)
    pc = canvas.px(center)
    a1 = math.atan2(pa[1] - pc[1], pa[0] - pc[0])
    a2 = math.atan2(pb[1] - pc[1], pb[0] - pc[0])
    delta = (a2 - a1 + math.pi) % _TWO_PI - math.pi
    sweep = 1 if delta > 0.0 else 0
    # the piece of an orthogonal circle inside the disk spans less than pi,
    # so the large-arc flag is always clear
    return f"{head}A {_fmt(r)} {_fmt(r)} 0 0 {sweep} {_fmt(pb[0])} {_fmt(pb[1])}"


def _rim_piece(canvas: _Canvas, side, move: bool) -> str:
    """Window-rim arc; increasing angle is clockwise in pixel coordinates."""
    pa = canvas.px(to_disk(side.a))
    pb = canvas.px(to_disk(side.b))
    dphi = side.phi[1] - side.phi[0]
    r = canvas.scale * math.hypot(*to_disk(side.a))
    head = f"M {_fmt(pa[0])} {_fmt(pa[1])} " if move else ""
    large = 1 if dphi > math.pi else 0
    return f"{head}A {_fmt(r)} {_fmt(r)} 0 {large} 0 {_fmt(pb[0])} {_fmt(pb[1])}"


def _cell_outline(canvas: _Canvas, cell) -> str | None:
    """Closed path data around a cell, or None for a full-window rim cell."""
    sides = cell.sides
    if len(sides) == 1 and sides[0].kind == "rim":
        return None
    pieces = []
    for k, s in enumerate(sides):
        if s.kind == "rim":
            pieces.append(_rim_piece(canvas, s, move=k == 0))
        else:
            pieces.append(_wall_piece(canvas, s.a, s.b, move=k == 0))
    return " ".join(pieces) + " Z"


def render_svg(tess: Tessellation, colors=None, spec: RenderSpec = RenderSpec()) -> str:
    """SVG text for a disk-window tessellation.

    colors, when given, assigns palette index 0 or 1 to each cell and the
    cells are painted before the boundary strokes; identical inputs yield
    byte-identical output.
    """
    cells = tess.cells
    if colors is not None:
        colors = list(colors)
        if len(colors) != len(cells):
            raise ValueError("colors must assign one palette index per cell")
        if any(c not in (0, 1) for c in colors):
            raise ValueError("colors must be palette indices 0 or 1")
    canvas = _Canvas(spec)
    sw = _fmt(spec.stroke_width)
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{spec.width_px}" '
        f'height="{spec.height_px}" viewBox="0 0 {spec.width_px} {spec.height_px}">',
        "<desc>hypervor 0.1.0</desc>",
        f'<rect width="{spec.width_px}" height="{spec.height_px}" fill="#ffffff"/>',
    ]
    if colors is not None:
        out.append('<g stroke="none">')
        for cell, c in zip(cells, colors):
            d = _cell_outline(canvas, cell)
            if d is None:
                r = canvas.scale * math.hypot(*to_disk(cell.sides[0].a))
                out.append(
                    f'<circle cx="{_fmt(canvas.cx)}" cy="{_fmt(canvas.cy)}" '
                    f'r="{_fmt(r)}" fill="{spec.palette[c]}"/>'
                )
            else:
                out.append(f'<path d="{d}" fill="{spec.palette[c]}"/>')
        out.append("</g>")
    out.append(f'<g fill="none" stroke="{spec.palette[0]}" stroke-width="{sw}">')
    for i, cell in enumerate(cells):
        for s in cell.sides:
            if s.kind == "wall":
                # each wall separates two cells; draw it once
                if s.other > i:
                    out.append(f'<path d="{_wall_piece(canvas, s.a, s.b, move=True)}"/>')
            elif s.phi[1] - s.phi[0] >= _TWO_PI - 1e-12:
                r = canvas.scale * math.hypot(*to_disk(s.a))
                out.append(
                    f'<circle cx="{_fmt(canvas.cx)}" cy="{_fmt(canvas.cy)}" r="{_fmt(r)}"/>'
                )
            else:
                out.append(f'<path d="{_rim_piece(canvas, s, move=True)}"/>')
    out.append(
        f'<circle cx="{_fmt(canvas.cx)}" cy="{_fmt(canvas.cy)}" r="{_fmt(canvas.scale)}"/>'
    )
    out.append("</g>")
    if spec.show_nuclei:
        r = _fmt(2.0 * spec.stroke_width)
        out.append(f'<g fill="{spec.palette[0]}">')
        for p in tess.nuclei:
            px, py = canvas.px(to_disk(p))
            out.append(f'<circle cx="{_fmt(px)}" cy="{_fmt(py)}" r="{r}"/>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
