"""Monte-Carlo bookkeeping and the deterministic parallel replica fold."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence, TypeVar

import numpy as np

from .sampling import Seed

T = TypeVar("T")


@dataclass(frozen=True)
class MCEstimate:
    """Sample mean with its standard error over n attempted replicas.

    `excluded` counts replicas discarded before contributing (window-cap
    events); the estimate is flagged invalid once they exceed 1% of n.
    """

    mean: float
    stderr: float
    n: int
    excluded: int
    seed: Seed

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("at least one replica is required")
        if not self.stderr >= 0.0:
            raise ValueError("standard error must be nonnegative")

    @property
    def valid(self) -> bool:
        return self.excluded / self.n < 0.01

    @classmethod
    def from_values(cls, values: Sequence[float], n: int, excluded: int, seed: Seed) -> "MCEstimate":
        arr = np.asarray(values, dtype=float)
        if arr.size == 0:
            raise ValueError("no included replicas")
        stderr = float(arr.std(ddof=1) / math.sqrt(arr.size)) if arr.size > 1 else 0.0
        return cls(float(arr.mean()), stderr, n, excluded, seed)


def replica_map(fn: Callable[[Seed], T], n: int, seed: Seed, workers: int = 1) -> list[T]:
    """Evaluate fn on streams seed.child(0..n-1), folding results in replica order.

    Replica i depends only on seed.child(i), and results are collected by
    index, so the output is identical for any worker count.
    """
    seeds = [seed.child(i) for i in range(n)]
    if workers <= 1:
        return [fn(s) for s in seeds]
    chunk = max(1, n // (workers * 8))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, seeds, chunksize=chunk))
