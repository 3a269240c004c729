"""Seeded Poisson point processes on hyperbolic disks and on the Bolza octagon.

All randomness flows from a Seed, a (master, stream) pair mapped onto the
2x64-bit key of the Philox counter-based generator, so replicas on disjoint
streams never share state and every sample sequence is reproducible
bit-for-bit across runs and worker counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import HPoint, J_METRIC, ball_area

COUNT_CAP = 10_000_000
_U64 = 2**64


@dataclass(frozen=True)
class Seed:
    master: int
    stream: int = 0

    def __post_init__(self):
        if not (0 <= self.master < _U64 and 0 <= self.stream < _U64):
            raise ValueError("master and stream must be unsigned 64-bit integers")

    def generator(self) -> np.random.Generator:
        key = np.array([self.master, self.stream], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def child(self, offset: int) -> "Seed":
        return Seed(self.master, (self.stream + offset) % _U64)


@dataclass(frozen=True)
class DiskWindow:
    radius: float

    def area(self) -> float:
        return ball_area(self.radius)


@dataclass(frozen=True)
class SurfaceWindow:
    label: str
    total_area: float

    def area(self) -> float:
        return self.total_area


@dataclass(frozen=True)
class PointCloud:
    points: tuple[HPoint, ...]
    intensity: float
    window: DiskWindow | SurfaceWindow


def annulus_points(lam: float, r_in: float, r_out: float, rng: np.random.Generator) -> np.ndarray:
    """Poisson(lam * area) points uniform on the annulus r_in < r <= r_out, as (n, 3) rows.

    Radial inversion: F(r) = (cosh r - cosh r_in)/(cosh r_out - cosh r_in).
    """
    c_in, c_out = math.cosh(r_in), math.cosh(r_out)
    mean = lam * 2.0 * math.pi * (c_out - c_in)
    n = int(rng.poisson(mean))
    cosh_r = c_in + rng.random(n) * (c_out - c_in)
    sinh_r = np.sqrt(cosh_r * cosh_r - 1.0)
    theta = rng.random(n) * (2.0 * math.pi)
    return np.column_stack((cosh_r, sinh_r * np.cos(theta), sinh_r * np.sin(theta)))


def poisson_disk(lam: float, radius: float, seed: Seed, count_cap: int = COUNT_CAP) -> PointCloud:
    """Poisson process of intensity lam on the disk B(O, radius)."""
    if lam <= 0.0:
        raise ValueError("intensity must be positive")
    if not 0.0 < radius <= 25.0:
        raise ValueError("disk radius must lie in (0, 25]")
    mean = lam * ball_area(radius)
    if mean > count_cap:
        raise ValueError(f"expected count {mean:.4g} exceeds the cap {count_cap}")
    pts = annulus_points(lam, 0.0, radius, seed.generator())
    return PointCloud(tuple(HPoint(*row) for row in pts), lam, DiskWindow(radius))


def octagon_points(count: int, rng: np.random.Generator, surf) -> tuple[np.ndarray, int]:
    """`count` points uniform on the fundamental octagon, by rejection from its circumdisk.

    Returns the points as (count, 3) rows plus the number of circumdisk draws
    spent, so callers can audit the acceptance rate.
    """
    walls_jt = (np.asarray([tuple(u) for u in surf.domain.walls], dtype=float) @ J_METRIC).T
    c_out = math.cosh(surf.circumradius)
    got: list[np.ndarray] = []
    n_got = 0
    attempts = 0
    while n_got < count:
        m = max(32, int(1.3 * (count - n_got) / 0.41) + 8)
        cosh_r = 1.0 + rng.random(m) * (c_out - 1.0)
        sinh_r = np.sqrt(cosh_r * cosh_r - 1.0)
        theta = rng.random(m) * (2.0 * math.pi)
        pts = np.column_stack((cosh_r, sinh_r * np.cos(theta), sinh_r * np.sin(theta)))
        attempts += m
        keep = pts[(pts @ walls_jt <= 0.0).all(axis=1)]
        got.append(keep)
        n_got += len(keep)
    out = np.concatenate(got)[:count] if got else np.empty((0, 3))
    return out, attempts


def poisson_surface(lam: float, surf, seed: Seed) -> PointCloud:
    """Poisson process of intensity lam on the surface, sampled in its fundamental octagon."""
    if lam <= 0.0:
        raise ValueError("intensity must be positive")
    rng = seed.generator()
    n = int(rng.poisson(lam * surf.area))
    pts, _ = octagon_points(n, rng, surf)
    return PointCloud(
        tuple(HPoint(*row) for row in pts), lam, SurfaceWindow(surf.label, surf.area)
    )
