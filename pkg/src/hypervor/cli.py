"""Experiment orchestration: seeded subcommands writing CSV, JSON, and SVG.

Configuration resolves in three layers: built-in defaults, then `--config
FILE` overrides (key=value lines), then command-line flags. The fully
resolved configuration is echoed into every artifact except for `workers`,
which changes wall time but never bytes.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

from .geometry import (
    ORIGIN,
    ball_area,
    dist,
    from_polar,
    polygon_perimeter,
    vertex_of_walls,
    wall_at_distance,
)
from .geometry import ConvexCell
from .graphs import (
    coloring_trials,
    exact_cheeger,
    random_regular,
    spanning_tree_regions,
)
from .lemmas import (
    AngleMeasure,
    inclusion_check,
    ring_intersection_area,
    sine_kernel,
    thickening_perimeter,
)
from .reference import boundary_density, density_experiment, expected_perimeter, typical_cell_experiment
from .render import RenderSpec, render_svg
from .sampling import Seed, poisson_disk
from .surface import bolza, coloring_experiment, surface_voronoi
from .voronoi import tessellate_window

_VERSION = "0.1.0"
_TWO_OVER_PI = 2.0 / math.pi
_FOUR_OVER_PI = 4.0 / math.pi

# one flat key space shared by the config file and the flags; every key has
# a default and the default's type fixes how file values are parsed
_DEFAULTS: dict[str, object] = {
    "lam": "1.0",  # intensity; density accepts a comma-separated sweep
    "replicas": 1000,  # typical-cell replicas per intensity
    "draws": 100,  # surface tessellation draws
    "trials": 1000,  # coloring trials for graph and color
    "radius": 8.0,  # disk window radius
    "n": 1000,  # graph vertex count
    "d": 3,  # graph degree
    "s": 50,  # region size floor; 0 selects uniform half colorings
    "r": 5.0,  # lemma radius
    "eps": 0.01,  # lemma thickening half-width
    "delta": 0.1,  # lemma band margin
    "samples": 100000,  # lemma sample count
    "seed": 20260816,  # master seed for every random stream
    "workers": 1,  # worker processes; affects wall time only
    "out": "",  # CSV/JSON path; empty writes to stdout
    "svg": "",  # SVG path; empty writes to stdout
    "name": "sine-kernel",  # lemma selector
    "color": False,  # paint cells black/white at random
    "check": False,  # evaluate acceptance bands; exit 2 on violation
    "show_nuclei": False,  # draw nucleus dots in figures
    "width": 800,  # SVG canvas width in px
    "height": 800,  # SVG canvas height in px
    "stroke": 1.2,  # SVG stroke width in px
    "band": 3.0,  # stderr multiplier for mean checks
    "rel_band": 0.05,  # relative tolerance for limit-law checks
}


class CLIError(Exception):
    """Usage or configuration problem; exit code 1."""


class CheckFailure(Exception):
    """An acceptance band was violated; carries the offending row."""


def _parse_value(key: str, raw: str):
    proto = _DEFAULTS[key]
    if isinstance(proto, bool):
        low = raw.lower()
        if low in ("true", "1", "yes"):
            return True
        if low in ("false", "0", "no"):
            return False
        raise CLIError(f"config key {key!r} expects a boolean, got {raw!r}")
    try:
        if isinstance(proto, int):
            return int(raw)
        if isinstance(proto, float):
            return float(raw)
    except ValueError:
        raise CLIError(f"config key {key!r} expects {type(proto).__name__}, got {raw!r}")
    return raw


def _read_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise CLIError(f"cannot read config file: {e}")
    overrides = {}
    for ln, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, raw = line.partition("=")
        if not sep:
            raise CLIError(f"{path}:{ln}: expected key=value")
        key = key.strip()
        if key not in _DEFAULTS:
            raise CLIError(f"{path}:{ln}: unknown config key {key!r}")
        overrides[key] = _parse_value(key, raw.strip())
    return overrides


def _fmt_val(v) -> str:
    return repr(v) if isinstance(v, float) else str(v)


def _echo_line(cfg: dict) -> str:
    parts = [f"{k}={_fmt_val(cfg[k])}" for k in sorted(_DEFAULTS) if k != "workers"]
    return " ".join(parts)


def _csv_text(cfg: dict, columns, rows, extra_comments=()) -> str:
    buf = io.StringIO()
    buf.write(f"# hypervor {_VERSION}\n")
    buf.write(f"# config: {_echo_line(cfg)}\n")
    for comment in extra_comments:
        buf.write(f"# {comment}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt_val(x) for x in row])
    return buf.getvalue()


def _json_text(cfg: dict, payload: dict) -> str:
    doc = {
        "artifact_version": _VERSION,
        "config": {k: v for k, v in cfg.items() if k != "workers"},
        "seed": cfg["seed"],
    }
    doc.update(payload)
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _emit(cfg: dict, key: str, text: str) -> None:
    """Write to the configured path; bare filenames land in HYPERVOR_OUT."""
    path = cfg[key]
    if not path:
        sys.stdout.write(text)
        return
    base = os.environ.get("HYPERVOR_OUT", "")
    if base and not os.path.dirname(path):
        path = os.path.join(base, path)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(text)


def _row_line(columns, row) -> str:
    return ",".join(f"{c}={_fmt_val(x)}" for c, x in zip(columns, row))


def _lam_single(cfg: dict) -> float:
    try:
        return float(cfg["lam"])
    except ValueError:
        raise CLIError(f"this command expects a single intensity, got {cfg['lam']!r}")


def _lam_list(cfg: dict) -> list[float]:
    try:
        lams = sorted({float(t) for t in str(cfg["lam"]).split(",") if t.strip()}, reverse=True)
    except ValueError:
        raise CLIError(f"cannot parse intensity list {cfg['lam']!r}")
    if not lams:
        raise CLIError("at least one intensity is required")
    return lams


def _square_cell(apothem: float = 0.8) -> ConvexCell:
    walls = tuple(wall_at_distance(apothem, 2.0 * math.pi * k / 4) for k in range(4))
    verts = tuple(vertex_of_walls(walls[k - 1], walls[k]) for k in range(4))
    return ConvexCell(nucleus=ORIGIN, vertices=verts, walls=walls)


# ---------------------------------------------------------------------------
# subcommands


def _cmd_typical_cell(cfg: dict) -> int:
    lam = _lam_single(cfg)
    row = typical_cell_experiment(lam, cfg["replicas"], Seed(cfg["seed"]), cfg["workers"])
    columns = ("lam", "quantity", "mean", "stderr", "n", "excluded", "target")
    rows = [
        (lam, "area", row.mean_area.mean, row.mean_area.stderr,
         row.mean_area.n, row.mean_area.excluded, 1.0 / lam),
        (lam, "perimeter", row.mean_perimeter.mean, row.mean_perimeter.stderr,
         row.mean_perimeter.n, row.mean_perimeter.excluded, row.reference_perimeter),
    ]
    _emit(cfg, "out", _csv_text(cfg, columns, rows))
    if cfg["check"]:
        for r in rows:
            if abs(r[2] - r[6]) > cfg["band"] * r[3]:
                raise CheckFailure(_row_line(columns, r))
    return 0


def _cmd_perimeter_ref(cfg: dict) -> int:
    lam = _lam_single(cfg)
    value = expected_perimeter(lam)
    print(f"{value:.10f}")
    if cfg["out"]:
        _emit(cfg, "out", _json_text(cfg, {"command": "perimeter-ref", "lam": lam, "value": value}))
    return 0


def _cmd_density(cfg: dict) -> int:
    lams = _lam_list(cfg)
    results = density_experiment(lams, cfg["replicas"], Seed(cfg["seed"]), cfg["workers"])
    columns = ("lam", "quantity", "value", "target", "rel_err", "n")
    rows = []
    for res in results:
        for quantity, value, target in (
            ("cell_ratio", res.ratio, _FOUR_OVER_PI),
            ("union_density", boundary_density(res), _TWO_OVER_PI),
        ):
            rel = abs(value - target) / target
            rows.append((res.lam, quantity, value, target, rel, res.mean_area.n))
    _emit(cfg, "out", _csv_text(cfg, columns, rows))
    if cfg["check"]:
        for r in rows:
            if r[4] > cfg["rel_band"]:
                raise CheckFailure(_row_line(columns, r))
    return 0


def _figure_colors(cfg: dict, count: int):
    if not cfg["color"]:
        return None
    rng = Seed(cfg["seed"]).child(1).generator()
    return [int(b) for b in rng.integers(0, 2, count)]


def _cmd_tessellate(cfg: dict) -> int:
    lam = _lam_single(cfg)
    tess = tessellate_window(poisson_disk(lam, cfg["radius"], Seed(cfg["seed"])))
    columns = ("cell", "area", "sides", "rim_sides")
    rows = [
        (i, c.area, len(c.sides), sum(1 for s in c.sides if s.kind == "rim"))
        for i, c in enumerate(tess.cells)
    ]
    comments = (
        f"total_area: {tess.total_area()!r}",
        f"boundary_length: {tess.boundary_length!r}",
    )
    if cfg["out"] or not cfg["svg"]:
        _emit(cfg, "out", _csv_text(cfg, columns, rows, comments))
    if cfg["svg"]:
        _emit(cfg, "svg", render_svg(tess, _figure_colors(cfg, len(tess.cells))))
    return 0


def _cmd_surface(cfg: dict) -> int:
    lam = _lam_single(cfg)
    surf = bolza()
    columns = ("draw", "cells", "total_area", "boundary_length", "density")
    rows = []
    for t in range(cfg["draws"]):
        tess = surface_voronoi(lam, surf, Seed(cfg["seed"]).child(t))
        rows.append(
            (t, len(tess.cells), tess.total_area(), tess.boundary_length,
             tess.boundary_length / surf.area)
        )
    target = lam * expected_perimeter(lam) / 2.0
    mean_density = sum(r[4] for r in rows) / len(rows)
    comments = (
        f"mean_density: {mean_density!r}",
        f"planar_prediction: {target!r}",
    )
    _emit(cfg, "out", _csv_text(cfg, columns, rows, comments))
    if cfg["check"]:
        for r in rows:
            if abs(r[2] - surf.area) > 1e-6 * surf.area:
                raise CheckFailure(_row_line(columns, r))
        if abs(mean_density - target) > cfg["rel_band"] * target:
            raise CheckFailure(f"mean_density={mean_density!r} target={target!r}")
    return 0


def _cmd_color(cfg: dict) -> int:
    lam = _lam_single(cfg)
    surf = bolza()
    outcomes = coloring_experiment(lam, surf, cfg["trials"], Seed(cfg["seed"]))
    columns = ("trial", "black_area", "boundary_length", "cheeger", "cells")
    rows = [
        (t, o.black_area, o.boundary_length, o.cheeger_value, o.cells)
        for t, o in enumerate(outcomes)
    ]
    _emit(cfg, "out", _csv_text(cfg, columns, rows))
    if cfg["check"]:
        blacks = [r[1] for r in rows]
        mean = sum(blacks) / len(blacks)
        var = sum((b - mean) ** 2 for b in blacks) / (len(blacks) - 1)
        stderr = math.sqrt(var / len(blacks))
        half = surf.area / 2.0
        if abs(mean - half) > cfg["band"] * stderr:
            raise CheckFailure(f"mean_black_area={mean!r} target={half!r} stderr={stderr!r}")
    return 0


def _cmd_graph(cfg: dict) -> int:
    n, d, s = cfg["n"], cfg["d"], cfg["s"]
    g = random_regular(n, d, Seed(cfg["seed"]).child(0))
    partition = spanning_tree_regions(g, s, Seed(cfg["seed"]).child(1)) if s else None
    raw = coloring_trials(g, cfg["trials"], Seed(cfg["seed"]).child(2), cfg["workers"], partition)
    columns = ("n", "d", "s", "trial", "boundary_edges", "black_count", "h_star", "seed")
    rows = [
        (n, d, s, t, int(b), int(k), h, cfg["seed"]) for t, (h, b, k) in enumerate(raw)
    ]
    _emit(cfg, "out", _csv_text(cfg, columns, rows))
    if cfg["check"]:
        if partition is not None:
            mean_h = sum(r[6] for r in rows) / len(rows)
            bound = 1.15 * (d - 2) / 2.0
            if not mean_h <= bound:
                raise CheckFailure(f"mean_h_star={mean_h!r} bound={bound!r}")
        else:
            expected = (d * n / 2.0) * n / (2.0 * (n - 1))
            ratio = sum(r[4] for r in rows) / len(rows) / expected
            if not 0.97 <= ratio <= 1.03:
                raise CheckFailure(f"boundary_ratio={ratio!r} expected_mean={expected!r}")
    return 0


def _cmd_exact_cheeger(cfg: dict) -> int:
    g = random_regular(cfg["n"], cfg["d"], Seed(cfg["seed"]))
    value = exact_cheeger(g)
    payload = {
        "command": "exact-cheeger",
        "h": value,
        "n": g.n,
        "d": g.d,
        "edges": g.n * g.d // 2,
    }
    _emit(cfg, "out", _json_text(cfg, payload))
    return 0


def _lemma_sine_kernel(cfg: dict):
    uniform_value = sine_kernel(AngleMeasure.uniform())
    rng = Seed(cfg["seed"]).generator()
    worst = uniform_value
    trials = 1000
    for _ in range(trials):
        k = int(rng.integers(1, 65))
        atoms = zip(rng.random(k) * 2.0 * math.pi, rng.random(k) + 1e-9)
        worst = max(worst, sine_kernel(AngleMeasure.from_atoms(atoms)))
    ok = abs(uniform_value - _TWO_OVER_PI) <= 1e-6 and worst <= _TWO_OVER_PI + 1e-9
    return ("pass" if ok else "fail"), worst - _TWO_OVER_PI, trials


def _lemma_ring_decay(cfg: dict):
    y = from_polar(1.0, 0.0)
    eps = cfg["eps"]
    areas = [ring_intersection_area(ORIGIN, y, cfg["r"], e) for e in (eps, eps / 10, eps / 100)]
    slopes = [
        (math.log(big) - math.log(small)) / math.log(10.0)
        for big, small in zip(areas, areas[1:])
    ]
    worst = min(slopes)
    return ("pass" if worst >= 1.4 else "fail"), 1.4 - worst, 3


def _lemma_inclusion(cfg: dict):
    report = inclusion_check(cfg["r"], cfg["eps"], cfg["delta"], cfg["samples"], Seed(cfg["seed"]))
    return report.verdict, report.max_slack, report.samples


def _lemma_thickening(cfg: dict):
    cell = _square_cell()
    perim = polygon_perimeter(cell)
    eps, samples = cfg["eps"], cfg["samples"]
    estimate = thickening_perimeter(cell, eps, samples, Seed(cfg["seed"]))
    sampling_radius = max(dist(cell.nucleus, v) for v in cell.vertices) + 0.05 + 1e-9
    stderr = math.sqrt(perim * ball_area(sampling_radius) / (2.0 * eps * samples))
    slack = abs(estimate - perim) - (cfg["band"] * stderr + 5.0 * eps * len(cell.vertices))
    return ("pass" if slack <= 0.0 else "fail"), slack, samples


_LEMMAS = {
    "sine-kernel": _lemma_sine_kernel,
    "ring-decay": _lemma_ring_decay,
    "inclusion": _lemma_inclusion,
    "thickening": _lemma_thickening,
}


def _cmd_lemma(cfg: dict) -> int:
    name = cfg["name"]
    if name not in _LEMMAS:
        raise CLIError(f"unknown lemma {name!r}; choose from {sorted(_LEMMAS)}")
    verdict, max_slack, samples = _LEMMAS[name](cfg)
    payload = {
        "lemma": name,
        "params": {"r": cfg["r"], "eps": cfg["eps"], "delta": cfg["delta"]},
        "verdict": verdict,
        "max_slack": max_slack,
        "samples": samples,
    }
    _emit(cfg, "out", _json_text(cfg, payload))
    if cfg["check"] and verdict != "pass":
        raise CheckFailure(f"lemma={name} verdict={verdict} max_slack={max_slack!r}")
    return 0


def _cmd_render(cfg: dict) -> int:
    lam = _lam_single(cfg)
    spec = RenderSpec(
        width_px=cfg["width"],
        height_px=cfg["height"],
        stroke_width=cfg["stroke"],
        show_nuclei=cfg["show_nuclei"],
    )
    tess = tessellate_window(poisson_disk(lam, cfg["radius"], Seed(cfg["seed"])))
    _emit(cfg, "svg", render_svg(tess, _figure_colors(cfg, len(tess.cells)), spec))
    return 0


_COMMANDS = {
    "typical-cell": _cmd_typical_cell,
    "perimeter-ref": _cmd_perimeter_ref,
    "density": _cmd_density,
    "tessellate": _cmd_tessellate,
    "surface": _cmd_surface,
    "color": _cmd_color,
    "graph": _cmd_graph,
    "exact-cheeger": _cmd_exact_cheeger,
    "lemma": _cmd_lemma,
    "render": _cmd_render,
}


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CLIError(message)


def _build_parser() -> _Parser:
    shared = _Parser(add_help=False)
    shared.add_argument("--config", default=None, help="key=value config file")
    shared.add_argument("--seed", type=int, default=None, help="master seed")
    shared.add_argument("--out", default=None, help="output path (CSV or JSON)")

    parser = _Parser(prog="hypervor", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def cmd(name, *, flags):
        p = sub.add_parser(name, parents=[shared])
        for flag, key, typ in flags:
            if typ is bool:
                p.add_argument(flag, dest=key, action="store_true", default=None)
            else:
                p.add_argument(flag, dest=key, type=typ, default=None)
        return p

    cmd("typical-cell", flags=[
        ("--lambda", "lam", str), ("--replicas", "replicas", int),
        ("--workers", "workers", int), ("--check", "check", bool),
        ("--band", "band", float),
    ])
    cmd("perimeter-ref", flags=[("--lambda", "lam", str)])
    cmd("density", flags=[
        ("--lambda", "lam", str), ("--replicas", "replicas", int),
        ("--workers", "workers", int), ("--check", "check", bool),
        ("--rel-band", "rel_band", float),
    ])
    cmd("tessellate", flags=[
        ("--lambda", "lam", str), ("--radius", "radius", float),
        ("--svg", "svg", str), ("--color", "color", bool),
    ])
    cmd("surface", flags=[
        ("--lambda", "lam", str), ("--draws", "draws", int),
        ("--check", "check", bool), ("--rel-band", "rel_band", float),
    ])
    cmd("color", flags=[
        ("--lambda", "lam", str), ("--trials", "trials", int),
        ("--check", "check", bool), ("--band", "band", float),
    ])
    cmd("graph", flags=[
        ("--n", "n", int), ("--d", "d", int), ("--s", "s", int),
        ("--trials", "trials", int), ("--workers", "workers", int),
        ("--check", "check", bool),
    ])
    cmd("exact-cheeger", flags=[("--n", "n", int), ("--d", "d", int)])
    cmd("lemma", flags=[
        ("--name", "name", str), ("--r", "r", float), ("--eps", "eps", float),
        ("--delta", "delta", float), ("--samples", "samples", int),
        ("--check", "check", bool),
    ])
    cmd("render", flags=[
        ("--lambda", "lam", str), ("--radius", "radius", float),
        ("--svg", "svg", str), ("--color", "color", bool),
        ("--width", "width", int), ("--height", "height", int),
        ("--stroke", "stroke", float), ("--show-nuclei", "show_nuclei", bool),
    ])
    return parser


def _resolve(args: argparse.Namespace) -> dict:
    cfg = dict(_DEFAULTS)
    if getattr(args, "config", None):
        cfg.update(_read_config(args.config))
    for key in _DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    return cfg


def main(argv: list[str] | None = None) -> int:
    try:
        args = _build_parser().parse_args(sys.argv[1:] if argv is None else argv)
        cfg = _resolve(args)
        return _COMMANDS[args.command](cfg)
    except CheckFailure as e:
        print(f"check failed: {e}")
        return 2
    except CLIError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (ValueError, RuntimeError, OSError, ArithmeticError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
