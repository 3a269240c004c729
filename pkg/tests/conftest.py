"""Shared test fixtures and Monte Carlo oracles."""

from __future__ import annotations

import math

import numpy as np
import pytest

from hypervor.geometry import (
    ConvexCell,
    HalfSpace,
    HPoint,
    Isometry,
    ball_area,
    dist,
    from_polar,
    mdot,
    polar_of,
)


def mc_cell_area(cell: ConvexCell, n: int, rng: np.random.Generator) -> tuple[float, float]:
    """Estimate a bounded cell's area by rejection in its circumscribed ball.

    Returns (estimate, stderr).
    """
    radius = cell.circumradius() + 1e-9
    d_n, theta_n = polar_of(cell.nucleus)
    move = Isometry.rotation(theta_n) @ Isometry.translation(d_n)

    # Uniform draws in B(nucleus, radius): cosh(r) uniform, angle uniform.
    cosh_r = 1.0 + rng.random(n) * (math.cosh(radius) - 1.0)
    theta = rng.random(n) * (2.0 * math.pi)
    sinh_r = np.sqrt(cosh_r**2 - 1.0)
    pts = np.column_stack((cosh_r, sinh_r * np.cos(theta), sinh_r * np.sin(theta)))
    pts = pts @ move.m.T

    inside = np.ones(n, dtype=bool)
    for u in cell.walls:
        inside &= pts[:, 1] * u.u1 + pts[:, 2] * u.u2 - pts[:, 0] * u.u0 <= 0.0
    frac = inside.mean()
    total = ball_area(radius)
    return frac * total, math.sqrt(frac * (1.0 - frac) / n) * total


def mc_ball_fraction(
    center: HPoint, radius: float, walls, n: int, rng: np.random.Generator
) -> float:
    """Fraction of B(center, radius) satisfying every wall constraint."""
    d_c, theta_c = polar_of(center)
    move = Isometry.rotation(theta_c) @ Isometry.translation(d_c)
    cosh_r = 1.0 + rng.random(n) * (math.cosh(radius) - 1.0)
    theta = rng.random(n) * (2.0 * math.pi)
    sinh_r = np.sqrt(cosh_r**2 - 1.0)
    pts = np.column_stack((cosh_r, sinh_r * np.cos(theta), sinh_r * np.sin(theta)))
    pts = pts @ move.m.T
    inside = np.ones(n, dtype=bool)
    for u in walls:
        inside &= pts[:, 1] * u.u1 + pts[:, 2] * u.u2 - pts[:, 0] * u.u0 <= 0.0
    return float(inside.mean())


def random_point(rng: np.random.Generator, r_max: float = 5.0) -> HPoint:
    return from_polar(rng.random() * r_max, rng.random() * 2.0 * math.pi)


def random_isometry(rng: np.random.Generator, t_max: float = 4.0) -> Isometry:
    g = (
        Isometry.rotation(rng.random() * 2.0 * math.pi)
        @ Isometry.translation(rng.random() * t_max, rng.random() * 2.0 * math.pi)
        @ Isometry.rotation(rng.random() * 2.0 * math.pi)
    )
    if rng.random() < 0.5:
        g = g @ Isometry.reflection(HalfSpace(0.0, 1.0, 0.0))
    return g


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260816)


def assert_points_close(a: HPoint, b: HPoint, tol: float = 1e-9) -> None:
    assert max(abs(a.x0 - b.x0), abs(a.x1 - b.x1), abs(a.x2 - b.x2)) < tol, (a, b)


def poincare_distance(za: complex, zb: complex) -> float:
    """Disk-model distance, an independent route to dist()."""
    num = 2.0 * abs(za - zb) ** 2
    den = (1.0 - abs(za) ** 2) * (1.0 - abs(zb) ** 2)
    return math.acosh(1.0 + num / den)


def sorted_vertex_key(cell: ConvexCell) -> list[tuple[float, float, float]]:
    return sorted((round(v.x0, 8), round(v.x1, 8), round(v.x2, 8)) for v in cell.vertices)
