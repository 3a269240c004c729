"""Quadrature reference for the typical cell's perimeter and the experiments
that confront it with Monte-Carlo estimates.

The expected perimeter at intensity lam is

    (8 / sqrt(pi lam)) * int_0^inf e^{-u} sqrt(u + u^2 / (4 pi lam)) du.

Scaled by lam it falls from 4*sqrt(lam) behaviour in the dense regime to the
limit 4/pi as lam -> 0; half of lam times it is the boundary density, whose
sparse limit 2/pi is the quantity the whole laboratory is calibrated against.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import scipy.integrate

from .geometry import polygon_area, polygon_perimeter
from .sampling import Seed
from .stats import MCEstimate, replica_map
from .voronoi import WindowCap, typical_cell

_CUTOFF = 50.0
_DENSITY_LAM_MAX = 10.0


def expected_perimeter(lam: float) -> float:
    """Expected perimeter of the typical cell, by adaptive quadrature.

    The integral is truncated at u = 50; the dropped tail is bounded in closed
    form and checked against the quadrature budget instead of being estimated.
    """
    if lam <= 0.0:
        raise ValueError("intensity must be positive")
    c = 1.0 / (4.0 * math.pi * lam)

    def integrand(u: float) -> float:
        return math.exp(-u) * math.sqrt(u * (1.0 + c * u))

    val, err = scipy.integrate.quad(
        integrand, 0.0, _CUTOFF, epsabs=1e-10, epsrel=1e-12, limit=200
    )
    if err > 1e-9:
        raise ArithmeticError(f"quadrature error estimate {err:.2e} is out of budget")
    # sqrt(u + c u^2) <= sqrt(u) + u sqrt(c) gives, beyond the cutoff,
    # a tail below e^{-50} (sqrt(50) + 1 + 51 sqrt(c)).
    tail = math.exp(-_CUTOFF) * (math.sqrt(_CUTOFF) + 1.0 + 51.0 * math.sqrt(c))
    assert tail < 1e-10, f"tail bound {tail:.2e} exceeds the quadrature budget"
    return 8.0 / math.sqrt(math.pi * lam) * val


@dataclass(frozen=True)
class RatioRow:
    """One intensity's worth of experiment output."""

    lam: float
    mean_area: MCEstimate
    mean_perimeter: MCEstimate
    ratio: float
    reference_perimeter: float

    def __post_init__(self):
        want = self.mean_perimeter.mean / self.mean_area.mean
        if abs(self.ratio - want) > 1e-12 * max(1.0, abs(want)):
            raise ValueError("ratio must equal mean perimeter over mean area")


def boundary_density(row: RatioRow) -> float:
    """Boundary length per unit area; every wall is shared by two cells."""
    return row.lam * row.mean_perimeter.mean / 2.0


def _cell_stats(lam: float, seed: Seed) -> tuple[float, float] | None:
    try:
        cell = typical_cell(lam, seed)
    except WindowCap:
        return None
    return polygon_area(cell), polygon_perimeter(cell)


def typical_cell_experiment(
    lam: float, replicas: int, seed: Seed, workers: int = 1
) -> RatioRow:
    """Monte-Carlo area and perimeter of the typical cell against the quadrature."""
    if replicas < 100:
        raise ValueError("at least 100 replicas are required")
    results = replica_map(functools.partial(_cell_stats, lam), replicas, seed, workers)
    kept = [r for r in results if r is not None]
    excluded = replicas - len(kept)
    areas = [a for a, _ in kept]
    perims = [p for _, p in kept]
    mean_area = MCEstimate.from_values(areas, replicas, excluded, seed)
    mean_perimeter = MCEstimate.from_values(perims, replicas, excluded, seed)
    return RatioRow(
        lam=lam,
        mean_area=mean_area,
        mean_perimeter=mean_perimeter,
        ratio=mean_perimeter.mean / mean_area.mean,
        reference_perimeter=expected_perimeter(lam),
    )


def density_experiment(
    lambdas: list[float], replicas: int, seed: Seed, workers: int = 1
) -> list[RatioRow]:
    """One RatioRow per intensity, descending, with disjoint seed streams.

    Boundary density lam * mean_perimeter / 2 is derived per row by
    boundary_density(); the sparse end of the sweep is the 2/pi trend.
    """
    if not lambdas:
        raise ValueError("at least one intensity is required")
    for lam in lambdas:
        if not 0.0 < lam <= _DENSITY_LAM_MAX:
            raise ValueError(f"intensities must lie in (0, {_DENSITY_LAM_MAX}]")
    if any(a <= b for a, b in zip(lambdas, lambdas[1:])):
        raise ValueError("intensities must be strictly descending")
    return [
        typical_cell_experiment(lam, replicas, seed.child(i * (replicas + 1)), workers)
        for i, lam in enumerate(lambdas)
    ]
