"""Hyperbolic-plane primitives in the hyperboloid model.

Points live on the upper sheet {x : <x,x> = -1, x0 >= 1} of the unit
hyperboloid in Minkowski 3-space with signature (-, +, +), where
<p, q> = p1*q1 + p2*q2 - p0*q0.  All lengths are hyperbolic, all angles
radians.  The Poincare disk is a rendering view only; the Klein view
(x1/x0, x2/x0) is what the clipping code uses, because geodesics are
straight chords there.  Numerics are trusted for radii up to about 25.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Tolerances:
    """Epsilon bundle used by validators; values are fixed per operation."""

    on_sheet: float = 1e-9
    unit_normal: float = 1e-9
    isometry: float = 1e-9
    vertex_on_wall: float = 1e-7
    degenerate: float = 1e-12


TOL = Tolerances()

J_METRIC = np.diag([-1.0, 1.0, 1.0])


class HPoint(NamedTuple):
    x0: float
    x1: float
    x2: float


class PolarCoord(NamedTuple):
    r: float
    theta: float


class HalfSpace(NamedTuple):
    """Geodesic half-space {x : <x, u> <= 0} with spacelike unit normal u."""

    u0: float
    u1: float
    u2: float


ORIGIN = HPoint(1.0, 0.0, 0.0)


def mdot(p, q) -> float:
    """Minkowski product; works for points and normals alike."""
    return p[1] * q[1] + p[2] * q[2] - p[0] * q[0]


def validate_point(p: HPoint, tol: Tolerances = TOL) -> None:
    # Tolerance scales with x0^2: the product is a difference of terms that
    # large near the rim of the trust region, so only relative error is meaningful.
    scale = max(1.0, p[0] * p[0])
    if abs(mdot(p, p) + 1.0) > tol.on_sheet * scale or p[0] < 1.0 - tol.on_sheet:
        raise ValueError(f"not on the upper hyperboloid sheet: {p}")


def validate_halfspace(u: HalfSpace, tol: Tolerances = TOL) -> None:
    scale = max(1.0, u[0] * u[0] + u[1] * u[1] + u[2] * u[2])
    if abs(mdot(u, u) - 1.0) > tol.unit_normal * scale:
        raise ValueError(f"normal is not spacelike unit: {u}")


def normalize_point(x0: float, x1: float, x2: float) -> HPoint:
    """Rescale onto the sheet; absorbs drift after isometry applications."""
    s2 = x0 * x0 - x1 * x1 - x2 * x2
    if s2 <= 0.0 or x0 <= 0.0:
        raise ValueError("cannot normalize: vector is not timelike-positive")
    s = math.sqrt(s2)
    return HPoint(x0 / s, x1 / s, x2 / s)


def from_polar(r: float, theta: float) -> HPoint:
    if r < 0.0:
        raise ValueError("radius must be nonnegative")
    return HPoint(math.cosh(r), math.sinh(r) * math.cos(theta), math.sinh(r) * math.sin(theta))


def polar_of(p: HPoint) -> PolarCoord:
    r = math.acosh(max(1.0, p.x0))
    theta = math.atan2(p.x2, p.x1) % TWO_PI if r > 0.0 else 0.0
    return PolarCoord(r, theta)


def to_disk(p: HPoint) -> tuple[float, float]:
    """Poincare disk coordinates; for rendering only."""
    d = 1.0 + p.x0
    return (p.x1 / d, p.x2 / d)


def from_disk(u: float, v: float) -> HPoint:
    t = u * u + v * v
    if t >= 1.0:
        raise ValueError("disk point must satisfy |z| < 1")
    w = 1.0 - t
    return HPoint((1.0 + t) / w, 2.0 * u / w, 2.0 * v / w)


def to_klein(p: HPoint) -> tuple[float, float]:
    return (p.x1 / p.x0, p.x2 / p.x0)


def from_klein(a: float, b: float) -> HPoint:
    t = a * a + b * b
    if t >= 1.0:
        raise ValueError("Klein point must satisfy |z| < 1")
    x0 = 1.0 / math.sqrt(1.0 - t)
    return HPoint(x0, a * x0, b * x0)


def dist(p: HPoint, q: HPoint) -> float:
    return math.acosh(max(1.0, -mdot(p, q)))


def law_of_cosines(d: float, r: float, theta: float) -> float:
    """Distance from [d;0] to [r;theta]."""
    if d < 0.0 or r < 0.0:
        raise ValueError("side lengths must be nonnegative")
    c = math.cosh(d) * math.cosh(r) - math.cos(theta) * math.sinh(d) * math.sinh(r)
    return math.acosh(max(1.0, c))


def ball_area(r: float) -> float:
    if r < 0.0:
        raise ValueError("radius must be nonnegative")
    return TWO_PI * (math.cosh(r) - 1.0)


def ball_circumference(r: float) -> float:
    if r < 0.0:
        raise ValueError("radius must be nonnegative")
    return TWO_PI * math.sinh(r)


def midpoint(p: HPoint, q: HPoint) -> HPoint:
    return normalize_point(p.x0 + q.x0, p.x1 + q.x1, p.x2 + q.x2)


def bisector(p: HPoint, q: HPoint) -> HalfSpace:
    """Half-space of points at least as close to p as to q; boundary is the bisector."""
    w = (q.x0 - p.x0, q.x1 - p.x1, q.x2 - p.x2)
    n2 = mdot(w, w)
    if not n2 > 1e-24:
        raise ValueError("bisector of (near-)coincident points is ill-conditioned")
    n = math.sqrt(n2)
    return HalfSpace(w[0] / n, w[1] / n, w[2] / n)


def complement(u: HalfSpace) -> HalfSpace:
    return HalfSpace(-u.u0, -u.u1, -u.u2)


def wall_at_distance(rho: float, theta: float) -> HalfSpace:
    """Half-space containing O whose boundary geodesic sits at distance rho in direction theta."""
    if rho <= 0.0:
        raise ValueError("wall distance must be positive")
    return HalfSpace(math.sinh(rho), math.cosh(rho) * math.cos(theta), math.cosh(rho) * math.sin(theta))


def wall_through(a: HPoint, b: HPoint, inside: HPoint) -> HalfSpace:
    """Half-space bounded by the geodesic through a and b, containing `inside`."""
    c = np.cross(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    u = (-c[0], c[1], c[2])
    n2 = mdot(u, u)
    if n2 <= 1e-24:
        raise ValueError("points do not span a geodesic")
    n = math.sqrt(n2)
    u = HalfSpace(u[0] / n, u[1] / n, u[2] / n)
    s = mdot(inside, u)
    if abs(s) < 1e-15:
        raise ValueError("inside point lies on the geodesic")
    return u if s < 0.0 else complement(u)


def wall_distance(p: HPoint, u: HalfSpace) -> float:
    """Distance from p to the boundary geodesic of u."""
    return math.asinh(abs(mdot(p, u)))


def vertex_of_walls(u: HalfSpace, v: HalfSpace) -> HPoint:
    """Intersection point of two boundary geodesics."""
    c = np.cross(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    w = (-c[0], c[1], c[2])
    n2 = -mdot(w, w)
    if n2 <= 1e-24:
        raise ValueError("walls do not intersect")
    n = math.sqrt(n2)
    if w[0] < 0.0:
        n = -n
    return HPoint(w[0] / n, w[1] / n, w[2] / n)


def tangent_toward(p: HPoint, q: HPoint) -> tuple[float, float, float]:
    """Unit tangent vector at p pointing toward q."""
    c = mdot(p, q)
    t = (q.x0 + c * p.x0, q.x1 + c * p.x1, q.x2 + c * p.x2)
    n2 = c * c - 1.0
    if n2 <= 1e-30:
        raise ValueError("tangent toward a coincident point is undefined")
    n = math.sqrt(n2)
    return (t[0] / n, t[1] / n, t[2] / n)


def angle_between_tangents(t1, t2) -> float:
    return math.acos(max(-1.0, min(1.0, mdot(t1, t2))))


def point_on_segment(a: HPoint, b: HPoint, s: float) -> HPoint:
    """Point at arclength s from a along the geodesic through a and b."""
    t = tangent_toward(a, b)
    c, sh = math.cosh(s), math.sinh(s)
    return normalize_point(c * a.x0 + sh * t[0], c * a.x1 + sh * t[1], c * a.x2 + sh * t[2])


def segment_length_in_disk(a: HPoint, b: HPoint, radius: float) -> float:
    """Length of the part of the geodesic segment [a, b] inside B(O, radius)."""
    d = dist(a, b)
    if d < 1e-15:
        return 0.0
    t = tangent_toward(a, b)
    m = math.sqrt(max(1.0, a.x0 * a.x0 - t[0] * t[0]))
    s0 = math.atanh(max(-1.0 + 1e-16, min(1.0 - 1e-16, -t[0] / a.x0)))
    cr = math.cosh(radius)
    if cr < m:
        return 0.0
    w = math.acosh(cr / m)
    lo = max(0.0, s0 - w)
    hi = min(d, s0 + w)
    return max(0.0, hi - lo)


# ---------------------------------------------------------------------------
# Isometries


@dataclass(frozen=True, eq=False)
class Isometry:
    """Element of the isometry group realized as a 3x3 matrix preserving J."""

    m: np.ndarray

    @classmethod
    def identity(cls) -> "Isometry":
        return cls(np.eye(3))

    @classmethod
    def rotation(cls, alpha: float) -> "Isometry":
        c, s = math.cos(alpha), math.sin(alpha)
        return cls(np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]]))

    @classmethod
    def translation(cls, t: float, theta: float = 0.0) -> "Isometry":
        """Hyperbolic translation by t along the geodesic through O in direction theta."""
        ch, sh = math.cosh(t), math.sinh(t)
        c, s = math.cos(theta), math.sin(theta)
        boost = np.array([[ch, sh, 0.0], [sh, ch, 0.0], [0.0, 0.0, 1.0]])
        rot = np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])
        return cls(rot @ boost @ rot.T)

    @classmethod
    def reflection(cls, u: HalfSpace) -> "Isometry":
        uv = np.asarray(u, dtype=float)
        return cls(np.eye(3) - 2.0 * np.outer(uv, J_METRIC @ uv))

    def apply(self, p: HPoint) -> HPoint:
        x = self.m @ np.asarray(p, dtype=float)
        return normalize_point(x[0], x[1], x[2])

    def apply_normal(self, u: HalfSpace) -> HalfSpace:
        """Push a wall normal forward; <gx, gu> = <x, u> since g preserves J."""
        v = self.m @ np.asarray(u, dtype=float)
        n = math.sqrt(mdot(v, v))
        return HalfSpace(v[0] / n, v[1] / n, v[2] / n)

    def inverse(self) -> "Isometry":
        return Isometry(J_METRIC @ self.m.T @ J_METRIC)

    def __matmul__(self, other: "Isometry") -> "Isometry":
        return Isometry(self.m @ other.m)

    def validate(self, tol: Tolerances = TOL) -> None:
        err = np.max(np.abs(self.m.T @ J_METRIC @ self.m - J_METRIC))
        scale = max(1.0, float(np.max(np.abs(self.m))) ** 2)
        if err > tol.isometry * scale:
            raise ValueError(f"matrix does not preserve the Minkowski form (err {err:.2e})")
        if self.m[0, 0] <= 0.0:
            raise ValueError("matrix reverses time orientation")


def apply(g: Isometry, p: HPoint) -> HPoint:
    return g.apply(p)


def compose(g: Isometry, h: Isometry) -> Isometry:
    return g @ h


def translation_length(g: Isometry) -> float:
    """Displacement along the axis; 0 for rotations and the identity.

    For matrices in SO+(2,1) the trace of a hyperbolic translation by t is
    1 + 2 cosh(t), so t = arcosh(max(1, (tr - 1)/2)).
    """
    tr = float(np.trace(g.m))
    return math.acosh(max(1.0, (tr - 1.0) / 2.0))


# ---------------------------------------------------------------------------
# Convex cells


class DegenerateCell(ValueError):
    """Raised when a polygon's Gauss-Bonnet area vanishes or goes negative."""


@dataclass(frozen=True)
class ConvexCell:
    """Bounded convex geodesic polygon.

    vertices are in counterclockwise order; walls[i] supports the edge from
    vertices[i] to vertices[i+1], so vertices[i] lies on walls[i-1] and
    walls[i].  sources[i], when present, labels wall i (a nucleus index for
    Voronoi cells, an orbit index for surface cells).
    """

    nucleus: HPoint
    vertices: tuple[HPoint, ...]
    walls: tuple[HalfSpace, ...]
    sources: tuple[int, ...] | None = None

    def __post_init__(self):
        if len(self.vertices) != len(self.walls):
            raise ValueError("one wall per edge required")
        if self.sources is not None and len(self.sources) != len(self.walls):
            raise ValueError("one source label per wall required")

    def contains(self, p: HPoint, slack: float = 0.0) -> bool:
        return all(mdot(p, u) <= slack for u in self.walls)

    def circumradius(self) -> float:
        return max(dist(self.nucleus, v) for v in self.vertices)


def interior_angles(cell: ConvexCell) -> list[float]:
    """Interior angle at each vertex, from the adjacent wall normals."""
    n = len(cell.walls)
    return [
        math.acos(max(-1.0, min(1.0, -mdot(cell.walls[i - 1], cell.walls[i]))))
        for i in range(n)
    ]


def polygon_area(cell: ConvexCell) -> float:
    """Gauss-Bonnet area (n-2)*pi - sum of interior angles."""
    n = len(cell.vertices)
    if n < 3:
        raise ValueError("a polygon needs at least 3 vertices")
    area = (n - 2) * math.pi - sum(interior_angles(cell))
    if area < TOL.degenerate:
        raise DegenerateCell(f"angle sum leaves no area ({area:.3e})")
    return area


def polygon_perimeter(cell: ConvexCell) -> float:
    n = len(cell.vertices)
    if n < 3:
        raise ValueError("a polygon needs at least 3 vertices")
    return sum(dist(cell.vertices[i], cell.vertices[(i + 1) % n]) for i in range(n))


def validate_cell(cell: ConvexCell, tol: Tolerances = TOL) -> None:
    """Check the convex-cell invariants; raises ValueError on violation."""
    n = len(cell.vertices)
    if n < 3:
        raise ValueError("a polygon needs at least 3 vertices")
    validate_point(cell.nucleus, tol)
    for u in cell.walls:
        validate_halfspace(u, tol)
    for u in cell.walls:
        if not mdot(cell.nucleus, u) < 0.0:
            raise ValueError("nucleus does not satisfy every wall strictly")
    for i, v in enumerate(cell.vertices):
        validate_point(v, tol)
        for u in (cell.walls[i - 1], cell.walls[i]):
            if abs(mdot(v, u)) > tol.vertex_on_wall:
                raise ValueError(f"vertex {i} is off its wall by {abs(mdot(v, u)):.2e}")
    ks = [to_klein(v) for v in cell.vertices]
    shoelace = sum(ks[i][0] * ks[(i + 1) % n][1] - ks[(i + 1) % n][0] * ks[i][1] for i in range(n))
    if shoelace <= 0.0:
        raise ValueError("vertices are not in counterclockwise order")
