"""Hyperbolic Voronoi cells by certified incremental half-space clipping.

Combinatorics run in the Klein disk, where geodesics are straight chords, so
Sutherland-Hodgman clipping against a candidate's bisector is exact there up
to rounding.  Candidates are processed in increasing distance from the
nucleus and clipping stops once the next candidate is farther than twice the
reach of the current cell, which provably cannot shrink it further.  All
reported coordinates, lengths and areas are then recomputed on the
hyperboloid (wall-pair intersections, Gauss-Bonnet), so the Klein pass only
decides the combinatorial structure.

A cell that escapes every sampled candidate is detected through the synthetic
bounding square (placed outside the Klein disk, where no hyperbolic point
lives) and reported as UnboundedCell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .geometry import (
    HPoint,
    HalfSpace,
    ORIGIN,
    ConvexCell,
    angle_between_tangents,
    ball_area,
    bisector,
    dist,
    from_polar,
    mdot,
    polar_of,
    segment_length_in_disk,
    tangent_toward,
    to_klein,
    vertex_of_walls,
)
from .sampling import COUNT_CAP, DiskWindow, PointCloud, Seed, annulus_points

TWO_PI = 2.0 * math.pi

_SYNTH = -2
_RIM = -1
_SQUARE = ((-1.05, -1.05), (1.05, -1.05), (1.05, 1.05), (-1.05, 1.05))


class UnboundedCell(Exception):
    """The half-space intersection is not compact."""


class WindowCap(Exception):
    """The certified window would exceed its radius or expected-count cap."""


class Side(NamedTuple):
    """One boundary piece of a window cell.

    kind 'wall' is a geodesic side against nucleus `other`, with `normal` the
    half-space normal; kind 'rim' is an arc of the window circle (other = -1)
    with `phi` its angle interval.
    """

    kind: str
    a: HPoint
    b: HPoint
    other: int
    length: float
    phi: tuple[float, float] | None = None
    normal: HalfSpace | None = None


@dataclass(frozen=True)
class Cell:
    """Convex cell of a windowed tessellation; sides in counterclockwise order."""

    nucleus: HPoint
    sides: tuple[Side, ...]
    area: float

    @property
    def vertices(self) -> tuple[HPoint, ...]:
        return tuple(s.a for s in self.sides)


@dataclass(frozen=True)
class Tessellation:
    nuclei: tuple[HPoint, ...]
    cells: tuple
    window: object
    boundary_length: float

    def total_area(self) -> float:
        return float(sum(_cell_area(c) for c in self.cells))

    def locate(self, p: HPoint) -> int:
        """Index of the cell containing p; equidistant ties go to the smaller index."""
        best, best_d = 0, float("inf")
        for i, q in enumerate(self.nuclei):
            d = dist(p, q)
            if d < best_d - 1e-15:
                best, best_d = i, d
        return best


def _cell_area(c) -> float:
    if isinstance(c, Cell):
        return c.area
    from .geometry import polygon_area

    return polygon_area(c)


# ---------------------------------------------------------------------------
# Klein-space clipping core


def _clip(xs, ys, srcs, a, b, c, new_src):
    """Sutherland-Hodgman against {a x + b y <= c}; srcs[i] labels the edge leaving vertex i."""
    n = len(xs)
    ox, oy, os = [], [], []
    for i in range(n):
        j = i + 1 if i + 1 < n else 0
        fi = a * xs[i] + b * ys[i] - c
        fj = a * xs[j] + b * ys[j] - c
        if fi <= 0.0:
            ox.append(xs[i])
            oy.append(ys[i])
            os.append(srcs[i])
            if fj > 0.0:
                t = fi / (fi - fj)
                ox.append(xs[i] + t * (xs[j] - xs[i]))
                oy.append(ys[i] + t * (ys[j] - ys[i]))
                os.append(new_src)
        elif fj <= 0.0:
            t = fi / (fi - fj)
            ox.append(xs[i] + t * (xs[j] - xs[i]))
            oy.append(ys[i] + t * (ys[j] - ys[i]))
            os.append(srcs[i])
    # drop zero-length edges; the surviving vertex keeps the later edge label
    k = 0
    while k < len(ox) and len(ox) > 1:
        nk = k + 1 if k + 1 < len(ox) else 0
        if abs(ox[k] - ox[nk]) + abs(oy[k] - oy[nk]) < 1e-15:
            del ox[k], oy[k], os[k]
        else:
            k += 1
    return ox, oy, os


def _vertex_reach(xs, ys, nucleus: HPoint) -> float:
    """Max distance from nucleus to the polygon's vertices; inf outside the Klein disk."""
    worst = 0.0
    for x, y in zip(xs, ys):
        t = x * x + y * y
        if t >= 1.0:
            return float("inf")
        x0 = 1.0 / math.sqrt(1.0 - t)
        c = -(x * x0 * nucleus.x1 + y * x0 * nucleus.x2 - x0 * nucleus.x0)
        d = math.acosh(max(1.0, c))
        if d > worst:
            worst = d
    return worst


def _disk_reach(xs, ys, nucleus: HPoint, radius: float) -> float:
    """Max distance from nucleus to (polygon intersect window disk)."""
    rho = math.tanh(radius)
    rho2 = rho * rho
    d_n, th_n = polar_of(nucleus)
    worst = 0.0
    n = len(xs)
    crossings = False
    any_inside = False
    for i in range(n):
        t = xs[i] * xs[i] + ys[i] * ys[i]
        if t <= rho2:
            any_inside = True
            x0 = 1.0 / math.sqrt(1.0 - t)
            c = -(xs[i] * x0 * nucleus.x1 + ys[i] * x0 * nucleus.x2 - x0 * nucleus.x0)
            worst = max(worst, math.acosh(max(1.0, c)))
        j = i + 1 if i + 1 < n else 0
        for tt in _segment_circle(xs[i], ys[i], xs[j], ys[j], rho):
            crossings = True
            px = xs[i] + tt * (xs[j] - xs[i])
            py = ys[i] + tt * (ys[j] - ys[i])
            phi = math.atan2(py, px)
            c = math.cosh(d_n) * math.cosh(radius) - math.cos(phi - th_n) * math.sinh(d_n) * math.sinh(radius)
            worst = max(worst, math.acosh(max(1.0, c)))
    # farthest rim point overall, if that direction survives in the polygon
    ax, ay = rho * math.cos(th_n + math.pi), rho * math.sin(th_n + math.pi)
    if _point_in_poly(ax, ay, xs, ys):
        worst = max(worst, d_n + radius)
    if not any_inside and not crossings and worst == 0.0:
        # polygon swallows the window disk entirely
        worst = d_n + radius
    return worst


def _segment_circle(x1, y1, x2, y2, rho) -> list[float]:
    """Parameters t in (0,1) where the segment crosses the circle |z| = rho, ascending."""
    dx, dy = x2 - x1, y2 - y1
    a = dx * dx + dy * dy
    if a < 1e-30:
        return []
    b = x1 * dx + y1 * dy
    c = x1 * x1 + y1 * y1 - rho * rho
    disc = b * b - a * c
    if disc <= 0.0:
        return []
    s = math.sqrt(disc)
    out = []
    for t in ((-b - s) / a, (-b + s) / a):
        if 0.0 < t < 1.0:
            out.append(t)
    return out


def _point_in_poly(px, py, xs, ys) -> bool:
    n = len(xs)
    for i in range(n):
        j = i + 1 if i + 1 < n else 0
        if (xs[j] - xs[i]) * (py - ys[i]) - (ys[j] - ys[i]) * (px - xs[i]) < 0.0:
            return False
    return True


def _drive(
    nucleus: HPoint,
    cand: np.ndarray,
    dists: np.ndarray,
    order: np.ndarray,
    reach_fn: Callable,
    vertex_budget: int = 0,
):
    """Clip the synthetic square by bisectors in distance order with certified stop.

    Returns the Klein polygon, its edge labels (ordinals into `used`), the
    list of processed candidates [(wall, point, order-index)], and the
    distance of the first unprocessed candidate (inf if none).

    A positive vertex_budget aborts runaway sliver accumulation: in the very
    sparse regime every remote candidate shaves a sliver off the square near
    the Klein rim without ever making the reach finite, so once the polygon
    outgrows the budget with infinite reach the cell cannot certify.
    """
    xs = [p[0] for p in _SQUARE]
    ys = [p[1] for p in _SQUARE]
    srcs = [_SYNTH] * 4
    used: list[tuple[HalfSpace, HPoint, int]] = []
    reach = float("inf")
    stop_d = float("inf")
    for k in order:
        if dists[k] > 2.0 * reach:
            stop_d = float(dists[k])
            break
        q = HPoint(cand[k, 0], cand[k, 1], cand[k, 2])
        u = bisector(nucleus, q)
        # <x,u> <= 0 divided by x0 > 0 reads u1*k1 + u2*k2 <= u0 in Klein coordinates
        xs, ys, srcs = _clip(xs, ys, srcs, u.u1, u.u2, u.u0, len(used))
        used.append((u, q, int(k)))
        if len(xs) < 3:
            raise RuntimeError("cell collapsed; nuclei too close for the tolerance bundle")
        reach = reach_fn(xs, ys)
        if vertex_budget and len(xs) > vertex_budget and math.isinf(reach):
            raise UnboundedCell("sliver accumulation without a finite reach")
    return xs, ys, srcs, used, stop_d


def _refine_polygon(nucleus, xs, srcs, used):
    """Hyperboloid vertices and walls of a fully bounded Klein polygon.

    Returns (vertices, walls, rows) where rows[i] is the candidate-array row
    behind walls[i].
    """
    n = len(srcs)
    verts: list[HPoint] = []
    walls: list[HalfSpace] = []
    rows: list[int] = []
    for i in range(n):
        prev = srcs[i - 1]
        cur = srcs[i]
        verts.append(vertex_of_walls(used[prev][0], used[cur][0]))
        walls.append(used[cur][0])
        rows.append(used[cur][2])
    # collapse numerically coincident corners together with their empty edge;
    # on wraparound drop the trailing vertex so the edge-wall pairing keeps
    # its alignment (deleting verts[0] would rotate vertices against walls)
    i = 0
    while i < len(verts) and len(verts) > 3:
        j = i + 1 if i + 1 < len(verts) else 0
        if dist(verts[i], verts[j]) < 1e-12:
            if j == 0:
                del verts[i], walls[i], rows[i]
            else:
                del verts[j], walls[i], rows[i]
        else:
            i += 1
    return verts, walls, rows


def _certified_cell(nucleus: HPoint, cand: np.ndarray, labels: np.ndarray):
    """Bounded Voronoi cell of nucleus among candidate rows, or UnboundedCell.

    Returns (cell, reach, first unprocessed distance).  `labels[k]` is the
    public source label of candidate row k.
    """
    d = np.arccosh(np.maximum(1.0, -(cand @ np.array([-nucleus.x0, nucleus.x1, nucleus.x2]))))
    order = np.argsort(d, kind="stable")
    xs, ys, srcs, used, stop_d = _drive(
        nucleus, cand, d, order, lambda px, py: _vertex_reach(px, py, nucleus), vertex_budget=512
    )
    if any(s == _SYNTH for s in srcs) or any(x * x + y * y >= 1.0 for x, y in zip(xs, ys)):
        raise UnboundedCell("cell is not compact within the sampled candidates")
    verts, walls, rows = _refine_polygon(nucleus, xs, srcs, used)
    cell = ConvexCell(nucleus, tuple(verts), tuple(walls), tuple(int(labels[r]) for r in rows))
    reach = max(dist(nucleus, v) for v in verts)
    return cell, reach, stop_d


def cell_of(nucleus: HPoint, others) -> ConvexCell:
    """Voronoi cell of nucleus with respect to `others`.

    Certified: clipping stops only when every unprocessed point is farther
    than twice the reach of the cell.  Raises UnboundedCell if the
    intersection of bisector half-spaces is not compact.
    """
    pts = list(others)
    cand = np.asarray([tuple(p) for p in pts], dtype=float).reshape(len(pts), 3)
    for row in cand:
        if max(abs(row[0] - nucleus.x0), abs(row[1] - nucleus.x1), abs(row[2] - nucleus.x2)) < 1e-10:
            raise ValueError("candidate coincides with the nucleus")
    cell, _, _ = _certified_cell(nucleus, cand, np.arange(len(pts)))
    return cell


# ---------------------------------------------------------------------------
# Palm typical cell


def initial_radius(lam: float) -> float:
    """Starting window radius: covers ~4 mean cell areas, never below cell diameter scale."""
    return min(25.0, max(math.acosh(1.0 + 4.0 / lam), 1.0 + 3.0 / math.sqrt(max(1.0, lam))))


def typical_cell(
    lam: float,
    seed: Seed,
    growth: float = 1.3,
    window_cap: float = 25.0,
    count_cap: int = COUNT_CAP,
) -> ConvexCell:
    """Palm typical cell: the cell of an extra nucleus at O in a Poisson process.

    The Poisson cloud starts in a certified window and the window grows by
    resampling only the new annulus (which preserves the law) until the cell
    is certified with margin: 2 * (max vertex distance) < R - 1.  Raises
    WindowCap when R would exceed `window_cap` or the expected sample count
    would exceed `count_cap`.
    """
    if lam <= 0.0:
        raise ValueError("intensity must be positive")
    rng = seed.generator()
    radius = initial_radius(lam)
    pts = annulus_points(lam, 0.0, radius, rng)
    while True:
        try:
            cell, reach, _ = _certified_cell(ORIGIN, pts, np.arange(len(pts)))
            if 2.0 * reach < radius - 1.0:
                return cell
        except UnboundedCell:
            pass
        if radius >= window_cap - 1e-12:
            raise WindowCap(f"window radius cap {window_cap} reached at intensity {lam}")
        new_radius = min(radius * growth, window_cap)
        if lam * ball_area(new_radius) > count_cap:
            raise WindowCap(f"expected count cap {count_cap} reached at radius {new_radius:.2f}")
        pts = np.vstack((pts, annulus_points(lam, radius, new_radius, rng)))
        radius = new_radius


# ---------------------------------------------------------------------------
# Window tessellation


def tessellate_window(cloud: PointCloud) -> Tessellation:
    """Voronoi tessellation of a disk window, cells clipped to the window.

    boundary_length counts every interior geodesic side once; window-rim arcs
    are not boundary.
    """
    if not isinstance(cloud.window, DiskWindow):
        raise ValueError("tessellate_window expects a disk window")
    n = len(cloud.points)
    if n < 1:
        raise ValueError("at least one point is required")
    radius = cloud.window.radius
    arr = np.asarray([tuple(p) for p in cloud.points], dtype=float).reshape(n, 3)
    cells = []
    boundary = 0.0
    for i in range(n):
        nucleus = cloud.points[i]
        mask = np.arange(n) != i
        cand = arr[mask]
        labels = np.arange(n)[mask]
        d = np.arccosh(np.maximum(1.0, -(cand @ np.array([-nucleus.x0, nucleus.x1, nucleus.x2]))))
        order = np.argsort(d, kind="stable")
        xs, ys, srcs, used, _ = _drive(
            nucleus, cand, d, order, lambda px, py: _disk_reach(px, py, nucleus, radius)
        )
        cell = _rim_clip(nucleus, xs, ys, srcs, used, labels, radius)
        cells.append(cell)
        for s in cell.sides:
            if s.kind == "wall" and s.other > i:
                boundary += s.length
    return Tessellation(tuple(cloud.points), tuple(cells), cloud.window, boundary)


def _wall_circle_angle(u: HalfSpace, radius: float, phi_guess: float) -> float:
    """Angle of the intersection of wall u with the circle of radius `radius` nearest phi_guess."""
    a = u.u1 * math.sinh(radius)
    b = u.u2 * math.sinh(radius)
    c = u.u0 * math.cosh(radius)
    m = math.hypot(a, b)
    phi0 = math.atan2(b, a)
    alpha = math.acos(max(-1.0, min(1.0, c / m)))
    cands = (phi0 + alpha, phi0 - alpha)
    return min(cands, key=lambda p: abs((p - phi_guess + math.pi) % TWO_PI - math.pi))


def _rim_clip(nucleus, xs, ys, srcs, used, labels, radius) -> Cell:
    """Intersect the Klein polygon with the window disk and measure the result."""
    rho = math.tanh(radius)
    rho2 = rho * rho
    n = len(xs)
    # boundary walk events: ('v', vertex index), ('e'|'x', phi estimate, edge index)
    events = []
    for i in range(n):
        j = i + 1 if i + 1 < n else 0
        fi = xs[i] * xs[i] + ys[i] * ys[i] - rho2
        fj = xs[j] * xs[j] + ys[j] * ys[j] - rho2
        if fi <= 0.0:
            events.append(("v", i))
        ts = _segment_circle(xs[i], ys[i], xs[j], ys[j], rho)
        if fi <= 0.0 < fj:
            events.append(("x", _cross_phi(xs, ys, i, j, ts[-1] if ts else 0.0), i))
        elif fj <= 0.0 < fi:
            events.append(("e", _cross_phi(xs, ys, i, j, ts[0] if ts else 1.0), i))
        elif fi > 0.0 and fj > 0.0 and len(ts) == 2:
            events.append(("e", _cross_phi(xs, ys, i, j, ts[0]), i))
            events.append(("x", _cross_phi(xs, ys, i, j, ts[1]), i))
    if not events:
        # no vertex inside and no crossing: the cell swallows the whole window
        p0 = from_polar(radius, 0.0)
        return Cell(
            nucleus,
            (Side("rim", p0, p0, _RIM, TWO_PI * math.sinh(radius), (0.0, TWO_PI)),),
            ball_area(radius),
        )
    if all(e[0] == "v" for e in events):
        verts, walls, rows = _refine_polygon(nucleus, xs, srcs, used)
        m = len(verts)
        sides = tuple(
            Side(
                "wall",
                verts[k],
                verts[(k + 1) % m],
                int(labels[rows[k]]),
                dist(verts[k], verts[(k + 1) % m]),
                None,
                walls[k],
            )
            for k in range(m)
        )
        return Cell(nucleus, sides, _gb_area(sides, radius))

    # mixed boundary: refine each event point, then bridge exits to entries
    # with counterclockwise rim arcs
    pts: list[tuple[HPoint, int | None, float | None]] = []
    for ev in events:
        if ev[0] == "v":
            i = ev[1]
            pts.append((vertex_of_walls(used[srcs[i - 1]][0], used[srcs[i]][0]), srcs[i], None))
        else:
            src = srcs[ev[2]]
            phi = _wall_circle_angle(used[src][0], radius, ev[1])
            pts.append((from_polar(radius, phi), src if ev[0] == "e" else None, phi))
    sides: list[Side] = []
    m = len(pts)
    for k in range(m):
        point, src, phi = pts[k]
        nxt_point, _, nxt_phi = pts[(k + 1) % m]
        if events[k][0] == "x":
            if events[(k + 1) % m][0] != "e":
                raise RuntimeError("rim walk lost exit/entry alternation")
            dphi = (nxt_phi - phi) % TWO_PI
            sides.append(Side("rim", point, nxt_point, _RIM, dphi * math.sinh(radius), (phi, phi + dphi)))
        else:
            sides.append(
                Side(
                    "wall",
                    point,
                    nxt_point,
                    int(labels[used[src][2]]),
                    dist(point, nxt_point),
                    None,
                    used[src][0],
                )
            )
    kept = tuple(s for s in sides if s.kind == "rim" or s.length > 1e-12)
    return Cell(nucleus, kept, _gb_area(kept, radius))


def _cross_phi(xs, ys, i, j, t) -> float:
    px = xs[i] + t * (xs[j] - xs[i])
    py = ys[i] + t * (ys[j] - ys[i])
    return math.atan2(py, px)


def _gb_area(sides, radius) -> float:
    """Generalized Gauss-Bonnet: rim arcs contribute cosh(R) * dphi, corners pi - angle."""
    total = -TWO_PI
    m = len(sides)
    for k, s in enumerate(sides):
        if s.kind == "rim":
            total += (s.phi[1] - s.phi[0]) * math.cosh(radius)
        prev = sides[k - 1]
        if prev.kind == "wall" and s.kind == "wall":
            # angle between half-spaces, independent of the corner position
            angle = math.acos(max(-1.0, min(1.0, -mdot(prev.normal, s.normal))))
        else:
            t_back = _corner_tangent(prev, s.a, backward=True)
            t_fwd = _corner_tangent(s, s.a, backward=False)
            angle = angle_between_tangents(t_back, t_fwd)
        total += math.pi - angle
    return total


def _corner_tangent(side: Side, v: HPoint, backward: bool):
    if side.kind == "wall":
        # tangent at v along the wall; J cross(u, v) is Minkowski-orthogonal
        # to both, so no short-edge amplification enters
        u = side.normal
        c = np.cross((u.u0, u.u1, u.u2), tuple(v))
        t = (-c[0], c[1], c[2])
        n = math.sqrt(mdot(t, t))
        t = (t[0] / n, t[1] / n, t[2] / n)
        target = side.a if backward else side.b
        if mdot(t, target) < 0.0:
            t = (-t[0], -t[1], -t[2])
        return t
    phi = side.phi[1] if backward else side.phi[0]
    s = 1.0 if backward else -1.0
    return (0.0, s * math.sin(phi), -s * math.cos(phi))


def boundary_length_within(tess: Tessellation, radius: float) -> float:
    """Total length of interior sides inside B(O, radius); each side counted once."""
    total = 0.0
    for i, cell in enumerate(tess.cells):
        for s in cell.sides:
            if s.kind == "wall" and s.other > i:
                total += segment_length_in_disk(s.a, s.b, radius)
    return total
