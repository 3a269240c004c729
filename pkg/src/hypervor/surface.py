"""The Bolza surface as a computable genus-2 laboratory.

Everything lives in the hyperboloid model: the surface is the quotient of the
plane by the group generated by eight translations pairing opposite sides of
the regular octagon with vertex angle pi/4.  Group elements are enumerated
once, breadth-first with pruning by image distance, and shared read-only by
every operation; quotient distances, Dirichlet angular sets, surface Voronoi
tessellations and the cell-coloring experiment are all reductions to planar
computations against that translate list.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .geometry import (
    ORIGIN,
    TWO_PI,
    ConvexCell,
    HPoint,
    Isometry,
    dist,
    from_polar,
    mdot,
    polar_of,
    polygon_area,
    wall_at_distance,
)
from .sampling import Seed, poisson_surface
from .voronoi import Cell, Side, Tessellation, UnboundedCell, _certified_cell

BOLZA_RHO = math.acosh(1.0 + math.sqrt(2.0))  # inradius of the octagon
BOLZA_RV = math.acosh(1.0 / math.tan(math.pi / 8) ** 2)  # circumradius
SYSTOLE = 2.0 * BOLZA_RHO

_CUTOFF = 12.0
_PREFIX_LADDER = (8.0, 9.0, 10.0, _CUTOFF)
_MIN_INTENSITY = 0.25


class CutoffTooSmall(Exception):
    """The enumerated translate list cannot certify the requested computation."""


@dataclass(frozen=True)
class FuchsianGroup:
    """Octagon side-pairing translations; generators[k+4] inverts generators[k]."""

    generators: tuple[Isometry, ...]
    label: str


@dataclass(frozen=True)
class SurfacePoint:
    """A surface point through its fundamental-domain representative."""

    rep: HPoint


@dataclass(frozen=True)
class ColoringOutcome:
    """One trial of the random black/white cell coloring.

    cheeger_value is |boundary| over the smaller color's area; a trial whose
    colors all agree carries value inf so degenerate trials never masquerade
    as isoperimetric upper bounds.
    """

    black_area: float
    boundary_length: float
    cheeger_value: float
    cells: int
    seed: Seed


@dataclass(frozen=True)
class IntervalSet:
    """Disjoint sorted angle intervals within [0, 2 pi)."""

    intervals: tuple[tuple[float, float], ...]

    def measure(self) -> float:
        return sum(hi - lo for lo, hi in self.intervals)

    def contains(self, theta: float) -> bool:
        t = theta % TWO_PI
        return any(lo <= t <= hi for lo, hi in self.intervals)


class SurfaceModel:
    """Immutable Bolza data: fundamental octagon plus the translate ball.

    translates are sorted by displacement of O, identity first; stack and
    displacements expose them as arrays for vectorized scans.  The object
    satisfies the sampling window duck type (domain, circumradius, area,
    label).
    """

    def __init__(
        self,
        group: FuchsianGroup,
        domain: ConvexCell,
        translates: tuple[Isometry, ...],
        displacements: np.ndarray,
        cutoff: float,
    ) -> None:
        self.group = group
        self.domain = domain
        self.genus = 2
        self.area = 4.0 * math.pi
        self.label = "bolza"
        self.translates = translates
        self.cutoff = cutoff
        self.circumradius = BOLZA_RV
        self.stack = np.stack([g.m for g in translates])
        self.displacements = displacements
        self.stack.setflags(write=False)
        self.displacements.setflags(write=False)

    def prefix_count(self, limit: float) -> int:
        """Translates with displacement at most limit (a ladder rung)."""
        return int(np.searchsorted(self.displacements, limit + 1e-12, side="right"))


def _enumerate_translates(
    gens: tuple[Isometry, ...], cutoff: float
) -> tuple[tuple[Isometry, ...], np.ndarray]:
    """Group ball by breadth-first word expansion with image-distance pruning.

    Keeping every prefix whose image of O stays within cutoff + R_v reaches
    all elements displacing O by at most cutoff: the geodesic to gamma O
    crosses a chain of adjacent octagon copies whose centers stay that close.
    Deduplication keys on the image of O, which is faithful because the group
    is torsion-free.
    """
    prune = cutoff + BOLZA_RV + 0.1
    gen_stack = np.stack([g.m for g in gens])
    frontier = np.eye(3)[None, :, :]
    seen = {(0.0, 0.0)}
    all_mats = [np.eye(3)[None, :, :]]
    for _ in range(64):
        children = np.einsum("fij,gjk->fgik", frontier, gen_stack).reshape(-1, 3, 3)
        images = children[:, :, 0]
        keep = images[:, 0] <= math.cosh(prune)
        children = children[keep]
        images = images[keep]
        disk = np.round(images[:, 1:] / (1.0 + images[:, 0:1]), 7)
        _, first = np.unique(disk, axis=0, return_index=True)
        children = children[np.sort(first)]
        disk = disk[np.sort(first)]
        fresh_rows = [i for i, key in enumerate(map(tuple, disk)) if key not in seen]
        if not fresh_rows:
            break
        seen.update(tuple(disk[i]) for i in fresh_rows)
        frontier = children[fresh_rows]
        all_mats.append(frontier)
    else:
        raise RuntimeError("translate enumeration did not terminate")
    mats = np.concatenate(all_mats)
    d = np.arccosh(np.maximum(1.0, mats[:, 0, 0]))
    keep = d <= cutoff + 1e-9
    mats, d = mats[keep], d[keep]
    order = np.lexsort((np.round(mats[:, 2, 0], 9), np.round(mats[:, 1, 0], 9), d))
    mats, d = mats[order], d[order]
    # Word paths to the same element differ by float noise; the grid hash can
    # split them across a rounding boundary, so finish with a proximity pass.
    distinct = np.ones(len(mats), dtype=bool)
    for i in range(1, len(mats)):
        if d[i] - d[i - 1] < 1e-6 and np.max(np.abs(mats[i] - mats[i - 1])) < 1e-8:
            distinct[i] = False
    mats, d = mats[distinct], d[distinct]
    return tuple(Isometry(m=m) for m in mats), d


@functools.lru_cache(maxsize=1)
def bolza() -> SurfaceModel:
    """The genus-2 Bolza surface with its translate ball of radius 12."""
    walls = tuple(wall_at_distance(BOLZA_RHO, k * math.pi / 4) for k in range(8))
    verts = tuple(from_polar(BOLZA_RV, -math.pi / 8 + k * math.pi / 4) for k in range(8))
    domain = ConvexCell(nucleus=ORIGIN, vertices=verts, walls=walls, sources=None)
    gens = tuple(Isometry.translation(SYSTOLE, k * math.pi / 4) for k in range(8))
    group = FuchsianGroup(generators=gens, label="bolza")
    translates, disp = _enumerate_translates(gens, _CUTOFF)
    # The shortest closed geodesic must show up in the ball: every short
    # conjugacy class has a representative displacing O by well under the cutoff.
    lengths = np.arccosh(np.maximum(1.0, (np.einsum("mii->m", np.stack([g.m for g in translates])) - 1.0) / 2.0))
    shortest = float(lengths[disp > 1e-9].min())
    if abs(shortest - SYSTOLE) > 1e-6:
        raise RuntimeError(f"systole check failed: {shortest} vs {SYSTOLE}")
    return SurfaceModel(group, domain, translates, disp, _CUTOFF)


def to_fundamental_domain(p: HPoint, surf: SurfaceModel) -> SurfacePoint:
    """Domain representative of the orbit of p.

    Greedy reduction: while a wall is violated, pull back through its pairing
    translation, strictly decreasing the distance to O.  Boundary points are
    canonicalized to the lexicographically smallest generator image so equal
    surface points share a representative bit for bit.
    """
    walls = surf.domain.walls
    gens = surf.group.generators
    q = p
    for _ in range(10_000):
        worst, s_max = -1, 1e-12
        for k, u in enumerate(walls):
            s = mdot(q, u)
            if s > s_max:
                worst, s_max = k, s
        if worst < 0:
            break
        q = gens[worst].inverse().apply(q)
    else:
        raise RuntimeError("domain reduction did not converge")
    best = q
    best_key = (round(q.x0, 10), round(q.x1, 10), round(q.x2, 10))
    for g in gens:
        cand = g.apply(q)
        if all(mdot(cand, u) <= 1e-9 for u in walls):
            key = (round(cand.x0, 10), round(cand.x1, 10), round(cand.x2, 10))
            if key < best_key:
                best, best_key = cand, key
    return SurfacePoint(rep=best)


def validate_surface_point(x: SurfacePoint, surf: SurfaceModel, tol: float = 1e-9) -> None:
    for u in surf.domain.walls:
        if mdot(x.rep, u) > tol:
            raise ValueError("representative leaves the fundamental domain")


def _min_orbit_distance(p: HPoint, q: HPoint, surf: SurfaceModel) -> float:
    """min over enumerated gamma of dist(p, gamma q)."""
    images0 = surf.stack @ np.asarray(q, dtype=float)
    dots = images0 @ np.array([-p.x0, p.x1, p.x2])
    return float(np.arccosh(np.maximum(1.0, -dots)).min())


def quotient_distance(x: SurfacePoint, y: SurfacePoint, surf: SurfaceModel) -> float:
    """Surface distance between two domain representatives."""
    need = dist(x.rep, y.rep) + 2.0 * BOLZA_RV
    if need > surf.cutoff:
        raise CutoffTooSmall(
            f"translate ball of radius {surf.cutoff} cannot certify distance {need:.2f}"
        )
    return _min_orbit_distance(x.rep, y.rep, surf)


def angular_set(x: SurfacePoint, r: float, surf: SurfaceModel) -> IntervalSet:
    """Angles theta for which [r; theta] around x stays in the Dirichlet domain of x.

    Each orbit point within 2r of the representative excises one arc of the
    circle of radius r; the set is the complement of their union, expressed in
    the frame that moves the representative to O.
    """
    if r <= 0.0:
        raise ValueError("radius must be positive")
    d_x, theta_x = polar_of(x.rep)
    if 2.0 * r + 2.0 * d_x > surf.cutoff - 1e-9:
        raise CutoffTooSmall(
            f"angular set at radius {r} needs orbit coverage {2 * r + 2 * d_x:.2f}"
        )
    frame = (Isometry.rotation(theta_x) @ Isometry.translation(d_x)).inverse()
    orbit = np.einsum("mij,j->mi", surf.stack, np.asarray(x.rep, dtype=float))
    moved = orbit @ frame.m.T
    d_orbit = np.arccosh(np.maximum(1.0, moved[:, 0]))
    tanh_r = math.tanh(r)
    cuts = []
    # Distinguishing the identity by displacement is safe with a wide margin:
    # every true orbit point sits at least a systole away, while the framed
    # representative lands on O up to the acosh noise floor of about 1e-8.
    for k in np.nonzero((d_orbit > 0.5 * SYSTOLE) & (d_orbit < 2.0 * r))[0]:
        rho = d_orbit[k] / 2.0
        ratio = math.tanh(rho) / tanh_r
        if ratio >= 1.0:
            continue
        theta_w = math.atan2(moved[k, 2], moved[k, 1]) % TWO_PI
        alpha = math.acos(ratio)
        cuts.append((theta_w - alpha, theta_w + alpha))
    if not cuts:
        return IntervalSet(intervals=((0.0, TWO_PI),))
    flat = []
    for lo, hi in cuts:
        lo, hi = lo % TWO_PI, hi % TWO_PI
        if lo <= hi:
            flat.append((lo, hi))
        else:
            flat.append((lo, TWO_PI))
            flat.append((0.0, hi))
    flat.sort()
    merged = [list(flat[0])]
    for lo, hi in flat[1:]:
        if lo <= merged[-1][1] + 1e-15:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    kept = []
    cursor = 0.0
    for lo, hi in merged:
        if lo > cursor:
            kept.append((cursor, lo))
        cursor = max(cursor, hi)
    if cursor < TWO_PI:
        kept.append((cursor, TWO_PI))
    return IntervalSet(intervals=tuple(kept))


def _surface_cells(
    nuclei: tuple[HPoint, ...], surf: SurfaceModel
) -> tuple[tuple[Cell, ...], float]:
    """Certified planar cells of the in-domain lifts, plus total boundary length.

    Candidates are lifts of every nucleus under a displacement prefix of the
    translate ball, escalated until twice the cell reach clears the margin
    prefix - R_v - d(O, nucleus) that bounds how close an unseen lift can be.
    """
    n = len(nuclei)
    arr = np.asarray([tuple(p) for p in nuclei], dtype=float).reshape(n, 3)
    cache: dict[float, tuple[np.ndarray, np.ndarray]] = {}

    def candidates(limit: float) -> tuple[np.ndarray, np.ndarray]:
        if limit not in cache:
            m = surf.prefix_count(limit)
            lifts = np.einsum("mij,nj->mni", surf.stack[:m], arr).reshape(m * n, 3)
            cache[limit] = (lifts, np.tile(np.arange(n), m))
        return cache[limit]

    cells = []
    for i in range(n):
        nucleus = nuclei[i]
        slack = BOLZA_RV + dist(ORIGIN, nucleus)
        conv = None
        for limit in _PREFIX_LADDER:
            margin = limit - slack
            if margin <= 0.0:
                continue
            lifts, labels = candidates(limit)
            mask = np.ones(len(lifts), dtype=bool)
            mask[i] = False  # identity block carries the nucleus itself at row i
            try:
                conv, reach, _ = _certified_cell(nucleus, lifts[mask], labels[mask])
            except UnboundedCell:
                conv = None
                continue
            if 2.0 * reach < margin:
                break
            conv = None
        if conv is None:
            raise CutoffTooSmall(f"cell {i} does not certify within the translate ball")
        verts = conv.vertices
        sides = tuple(
            Side(
                kind="wall",
                a=verts[k],
                b=verts[(k + 1) % len(verts)],
                other=conv.sources[k],
                length=dist(verts[k], verts[(k + 1) % len(verts)]),
                phi=None,
                normal=conv.walls[k],
            )
            for k in range(len(verts))
        )
        cells.append(Cell(nucleus=nucleus, sides=sides, area=polygon_area(conv)))
    boundary = sum(
        s.length for i, c in enumerate(cells) for s in c.sides if s.other > i
    )
    return tuple(cells), boundary


def surface_voronoi(lam: float, surf: SurfaceModel, seed: Seed) -> Tessellation:
    """Poisson-Voronoi tessellation of the surface.

    Each cell is the full planar Voronoi cell of its in-domain lift against
    every lifted nucleus, own orbit included, so the cells partition the
    surface and areas sum to 4 pi.  Sides against the own orbit are the cut
    locus, not boundary between cells, and are excluded from boundary_length;
    every side between distinct cells is counted once.
    """
    if lam < _MIN_INTENSITY:
        raise ValueError(f"intensity below the design floor {_MIN_INTENSITY}")
    cloud = poisson_surface(lam, surf, seed)
    n = len(cloud.points)
    if n == 0:
        whole = Cell(nucleus=ORIGIN, sides=(), area=surf.area)
        return Tessellation((), (whole,), cloud.window, 0.0)
    cells, boundary = _surface_cells(cloud.points, surf)
    return Tessellation(tuple(cloud.points), cells, cloud.window, boundary)


def coloring_experiment(
    lam: float, surf: SurfaceModel, trials: int, seed: Seed
) -> list[ColoringOutcome]:
    """Independent fair colorings of fresh tessellations.

    Trial t draws its tessellation from seed.child(2t) and its colors from
    seed.child(2t+1); outcomes record the black area, the length of the
    boundary separating the two colors, and the resulting Cheeger value.
    """
    if trials < 100:
        raise ValueError("at least 100 trials are required")
    outcomes = []
    for t in range(trials):
        tess_seed = seed.child(2 * t)
        tess = surface_voronoi(lam, surf, tess_seed)
        rng = seed.child(2 * t + 1).generator()
        black = rng.random(len(tess.cells)) < 0.5
        black_area = float(sum(c.area for c, b in zip(tess.cells, black) if b))
        boundary = 0.0
        for i, c in enumerate(tess.cells):
            for s in c.sides:
                if s.other > i and black[i] != black[s.other]:
                    boundary += s.length
        smaller = min(black_area, surf.area - black_area)
        cheeger = boundary / smaller if smaller > 1e-12 else math.inf
        outcomes.append(
            ColoringOutcome(
                black_area=black_area,
                boundary_length=boundary,
                cheeger_value=cheeger,
                cells=len(tess.nuclei),
                seed=tess_seed,
            )
        )
    return outcomes
