"""Random regular graphs: half colorings, region decompositions, exact Cheeger.

The graph warm-up mirrors the surface pipeline: a random d-regular graph is
cut into connected regions of controlled size along a random spanning tree,
the regions are colored by fair coins, and the boundary of the black set
witnesses a Cheeger upper bound near (d - 2)/2 instead of the naive d/2.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .sampling import Seed
from .stats import MCEstimate, replica_map

_EXACT_CAP = 20
_REJECTION_CAP = 1000


def _connected(n: int, u: np.ndarray, v: np.ndarray) -> bool:
    pair = np.concatenate([u, v])
    mate = np.concatenate([v, u])
    order = np.argsort(pair, kind="stable")
    pair, mate = pair[order], mate[order]
    start = np.searchsorted(pair, np.arange(n + 1))
    seen = np.zeros(n, dtype=bool)
    seen[0] = True
    frontier = [0]
    while frontier:
        w = frontier.pop()
        for x in mate[start[w] : start[w + 1]]:
            if not seen[x]:
                seen[x] = True
                frontier.append(int(x))
    return bool(seen.all())


@dataclass(frozen=True)
class RegularGraph:
    """Simple connected graph with every vertex of degree d.

    Edges are canonical: each pair (u, v) has u < v and the list is sorted.
    """

    n: int
    d: int
    adjacency: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.n < 2 or self.d < 1 or (self.n * self.d) % 2:
            raise ValueError("need n >= 2, d >= 1, and n * d even")
        if len(self.adjacency) != self.n * self.d // 2:
            raise ValueError("edge count must be n * d / 2")
        if list(self.adjacency) != sorted(set(self.adjacency)):
            raise ValueError("edges must be sorted and distinct")
        u, v = self.edge_arrays()
        if np.any(u >= v) or np.any(u < 0) or np.any(v >= self.n):
            raise ValueError("each edge must satisfy 0 <= u < v < n")
        degrees = np.bincount(np.concatenate([u, v]), minlength=self.n)
        if np.any(degrees != self.d):
            raise ValueError("every vertex must have degree d")
        if not _connected(self.n, u, v):
            raise ValueError("graph must be connected")

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        arr = np.asarray(self.adjacency, dtype=np.int64).reshape(-1, 2)
        return arr[:, 0], arr[:, 1]

    def neighbor_lists(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for a, b in self.adjacency:
            adj[a].append(b)
            adj[b].append(a)
        return adj


@dataclass(frozen=True)
class RegionPartition:
    """Assignment of every vertex to one connected region of size in [s, d*s]."""

    region_of: tuple[int, ...]
    sizes: tuple[int, ...]
    s: int

    def __post_init__(self):
        if self.s < 2:
            raise ValueError("target size must be at least 2")
        counts = np.bincount(
            np.asarray(self.region_of, dtype=np.int64), minlength=len(self.sizes)
        )
        if len(counts) != len(self.sizes) or np.any(
            counts != np.asarray(self.sizes, dtype=np.int64)
        ):
            raise ValueError("sizes must count the region ids exactly")
        if min(self.sizes) < self.s:
            raise ValueError("every region must have at least s vertices")


def validate_partition(g: RegularGraph, p: RegionPartition) -> None:
    """Raise unless every region is connected in g with size in [s, d*s]."""
    if len(p.region_of) != g.n:
        raise ValueError("partition must cover every vertex")
    if max(p.sizes) > g.d * p.s:
        raise ValueError("region size exceeds d * s")
    adj = g.neighbor_lists()
    region = np.asarray(p.region_of, dtype=np.int64)
    seen = np.zeros(g.n, dtype=bool)
    first = {}
    for v in range(g.n):
        first.setdefault(int(region[v]), v)
    for rid, size in enumerate(p.sizes):
        frontier = [first[rid]]
        seen[first[rid]] = True
        found = 1
        while frontier:
            w = frontier.pop()
            for x in adj[w]:
                if region[x] == rid and not seen[x]:
                    seen[x] = True
                    found += 1
                    frontier.append(x)
        if found != size:
            raise ValueError("region induces a disconnected subgraph")


def random_regular(n: int, d: int, seed: Seed) -> RegularGraph:
    """Uniform simple connected d-regular graph by pairing-model rejection."""
    if d < 3:
        raise ValueError("degree must be at least 3")
    if n <= d:
        raise ValueError("need more vertices than the degree")
    if (n * d) % 2:
        raise ValueError("n * d must be even")
    rng = seed.generator()
    stubs = np.repeat(np.arange(n, dtype=np.int64), d)
    for _ in range(_REJECTION_CAP):
        perm = rng.permutation(stubs)
        lo = np.minimum(perm[0::2], perm[1::2])
        hi = np.maximum(perm[0::2], perm[1::2])
        if np.any(lo == hi):
            continue
        pairs = lo * n + hi
        if np.unique(pairs).size != pairs.size:
            continue
        if not _connected(n, lo, hi):
            continue
        edges = sorted(zip(lo.tolist(), hi.tolist()))
        return RegularGraph(n=n, d=d, adjacency=tuple(edges))
    raise RuntimeError(
        f"pairing model rejected {_REJECTION_CAP} times; parameters infeasible"
    )


class ColoringEstimate(NamedTuple):
    """Monte-Carlo Cheeger witness with its boundary and black-count marginals."""

    h_star: MCEstimate
    boundary_edges: MCEstimate
    black_count: MCEstimate


def _half_trial(n: int, u: np.ndarray, v: np.ndarray, seed: Seed) -> tuple[float, float, float]:
    rng = seed.generator()
    black = np.zeros(n, dtype=bool)
    black[rng.permutation(n)[: n // 2]] = True
    boundary = int(np.count_nonzero(black[u] != black[v]))
    return boundary / (n // 2), float(boundary), float(n // 2)


def coloring_trials(
    g: RegularGraph,
    trials: int,
    seed: Seed,
    workers: int = 1,
    partition: "RegionPartition | None" = None,
) -> tuple[tuple[float, float, float], ...]:
    """Per-trial (h_star, boundary_edges, black_count) rows.

    Uniform n/2-subsets when partition is None, fair region colorings
    otherwise; trial t draws from seed.child(t) either way, so the estimate
    wrappers and raw rows agree.
    """
    if trials < 1:
        raise ValueError("at least one trial is required")
    u, v = g.edge_arrays()
    if partition is None:
        if g.n % 2:
            raise ValueError("half coloring needs an even vertex count")
        fn = functools.partial(_half_trial, g.n, u, v)
    else:
        validate_partition(g, partition)
        region_of = np.asarray(partition.region_of, dtype=np.int64)
        sizes = np.asarray(partition.sizes, dtype=np.int64)
        fn = functools.partial(_region_trial, g.n, u, v, region_of, sizes)
    return tuple(replica_map(fn, trials, seed, workers))


def _estimate_from_rows(rows, trials: int, seed: Seed) -> ColoringEstimate:
    return ColoringEstimate(
        h_star=MCEstimate.from_values([r[0] for r in rows], trials, 0, seed),
        boundary_edges=MCEstimate.from_values([r[1] for r in rows], trials, 0, seed),
        black_count=MCEstimate.from_values([r[2] for r in rows], trials, 0, seed),
    )


def half_coloring_estimate(
    g: RegularGraph, trials: int, seed: Seed, workers: int = 1
) -> ColoringEstimate:
    """h*(A) over uniform n/2-subsets A; E|boundary| is half the edge count."""
    return _estimate_from_rows(coloring_trials(g, trials, seed, workers), trials, seed)


def spanning_tree_regions(g: RegularGraph, s: int, seed: Seed) -> RegionPartition:
    """Cut a random DFS spanning tree bottom-up into regions of size in [s, d*s].

    Walking vertices in reverse DFS preorder accumulates pending subtree
    sizes; a subtree is carved off as soon as its pending size reaches s, so
    carved sizes stay below 1 + (children)(s - 1) <= d*s. A leftover around
    the root (pending < s) merges into the region of a tree neighbor, which
    keeps that region connected and within the same bound.
    """
    if s < 2:
        raise ValueError("target size must be at least 2")
    if g.n < 2 * s:
        raise ValueError("need at least 2s vertices")
    rng = seed.generator()
    adj = g.neighbor_lists()
    root = int(rng.integers(g.n))
    parent = np.full(g.n, -1, dtype=np.int64)
    seen = np.zeros(g.n, dtype=bool)
    seen[root] = True
    order = []
    stack = [root]
    while stack:
        w = stack.pop()
        order.append(w)
        for x in rng.permutation(adj[w]):
            if not seen[x]:
                seen[x] = True
                parent[x] = w
                stack.append(int(x))
    children: list[list[int]] = [[] for _ in range(g.n)]
    for w in order[1:]:
        children[parent[w]].append(w)

    region = np.full(g.n, -1, dtype=np.int64)
    pending = np.ones(g.n, dtype=np.int64)
    sizes: list[int] = []

    def carve(top: int, rid: int) -> int:
        count = 0
        grab = [top]
        while grab:
            w = grab.pop()
            region[w] = rid
            count += 1
            grab.extend(x for x in children[w] if region[x] < 0)
        return count

    for w in reversed(order):
        if pending[w] >= s:
            sizes.append(carve(w, len(sizes)))
            pending[w] = 0
        if parent[w] >= 0:
            pending[parent[w]] += pending[w]
    if region[root] < 0:
        target = -1
        for w in order:
            if region[w] < 0:
                for x in children[w]:
                    if region[x] >= 0:
                        target = int(region[x])
                        break
            if target >= 0:
                break
        leftover = region < 0
        region[leftover] = target
        sizes[target] += int(np.count_nonzero(leftover))

    part = RegionPartition(
        region_of=tuple(int(r) for r in region), sizes=tuple(sizes), s=s
    )
    validate_partition(g, part)
    return part


def _region_trial(
    n: int,
    u: np.ndarray,
    v: np.ndarray,
    region_of: np.ndarray,
    sizes: np.ndarray,
    seed: Seed,
) -> tuple[float, float, float]:
    rng = seed.generator()
    colors = rng.random(len(sizes)) < 0.5
    black = int(sizes[colors].sum())
    boundary = int(np.count_nonzero(colors[region_of[u]] != colors[region_of[v]]))
    smaller = min(black, n - black)
    h = boundary / smaller if smaller > 0 else float("inf")
    return h, float(boundary), float(black)


def region_coloring_estimate(
    g: RegularGraph, p: RegionPartition, trials: int, seed: Seed, workers: int = 1
) -> ColoringEstimate:
    """h*(A) for A = union of regions colored black by fair coins.

    Only inter-region edges can contribute to the boundary, so the mean
    tracks (d - 2)/2 rather than the half-coloring d/2. A trial whose black
    set is empty or full yields h* = inf; with many regions this has
    probability 2^(1 - regions) and never occurs at test scale.
    """
    rows = coloring_trials(g, trials, seed, workers, partition=p)
    return _estimate_from_rows(rows, trials, seed)


def inter_region_edges(g: RegularGraph, p: RegionPartition) -> int:
    """Count edges whose endpoints lie in different regions."""
    u, v = g.edge_arrays()
    region_of = np.asarray(p.region_of, dtype=np.int64)
    return int(np.count_nonzero(region_of[u] != region_of[v]))


def exact_cheeger(g: RegularGraph) -> float:
    """Exact min of |boundary A| / |A| over nonempty subsets with |A| <= n/2.

    Bitmask enumeration; the final minimum is selected by cross-multiplied
    integer comparison, so the result is an exact rational cast to float.
    """
    if g.n > _EXACT_CAP:
        raise ValueError(f"exact solver is capped at n = {_EXACT_CAP}")
    masks = np.arange(1, 1 << g.n, dtype=np.uint32)
    sizes = np.bitwise_count(masks).astype(np.int64)
    keep = sizes * 2 <= g.n
    masks, sizes = masks[keep], sizes[keep]
    boundary = np.zeros(masks.size, dtype=np.int64)
    for a, b in g.adjacency:
        boundary += ((masks >> np.uint32(a)) ^ (masks >> np.uint32(b))) & 1
    quotients = boundary / sizes
    near = np.flatnonzero(quotients <= quotients.min() + 1e-12)
    best_b, best_s = int(boundary[near[0]]), int(sizes[near[0]])
    for i in near[1:]:
        b, sz = int(boundary[i]), int(sizes[i])
        if b * best_s < best_b * sz:
            best_b, best_s = b, sz
    return best_b / best_s


def tree_ball_hstar(d: int, k: int) -> float:
    """h* of the depth-k ball in the infinite d-regular tree.

    The ball is the smaller side (the tree is infinite), every depth-k vertex
    sends d - 1 edges outward, and the count is exact in integers. The value
    approaches d - 2 from above as k grows.
    """
    if d < 3 or k < 1:
        raise ValueError("need d >= 3 and k >= 1")
    layer = d * (d - 1) ** (k - 1)
    size = 1 + d * ((d - 1) ** k - 1) // (d - 2)
    return layer * (d - 1) / size
