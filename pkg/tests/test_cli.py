"""CLI exit codes, config layering, artifact schemas, byte determinism."""

from __future__ import annotations

import json
import math

import pytest

from hypervor.cli import main
from hypervor.geometry import ball_area
from hypervor.graphs import exact_cheeger, random_regular
from hypervor.reference import expected_perimeter
from hypervor.sampling import Seed


def read_csv(path):
    lines = path.read_text().splitlines()
    comments = [l for l in lines if l.startswith("#")]
    data = [l for l in lines if not l.startswith("#")]
    return comments, data[0].split(","), [l.split(",") for l in data[1:]]


# ---------------------------------------------------------------------------
# exit codes and config resolution


def test_usage_errors_exit_1(tmp_path, capsys):
    assert main(["no-such-command"]) == 1
    assert main(["graph", "--no-such-flag", "1"]) == 1
    assert main(["typical-cell", "--replicas", "many"]) == 1
    assert main(["lemma", "--name", "no-such-lemma"]) == 1
    out = tmp_path / "missing-dir" / "x.csv"
    assert main(["graph", "--n", "20", "--trials", "5", "--out", str(out)]) == 1
    capsys.readouterr()


def test_config_file_layering(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("lam = 0.5\n# a comment\n\nseed=11\n")
    assert main(["perimeter-ref", "--config", str(cfg)]) == 0
    assert capsys.readouterr().out == f"{expected_perimeter(0.5):.10f}\n"
    # command-line flags override file values
    assert main(["perimeter-ref", "--config", str(cfg), "--lambda", "1"]) == 0
    assert capsys.readouterr().out == f"{expected_perimeter(1.0):.10f}\n"


def test_config_file_rejects_unknown_and_malformed(tmp_path, capsys):
    bad_key = tmp_path / "a.cfg"
    bad_key.write_text("bogus=1\n")
    assert main(["perimeter-ref", "--config", str(bad_key)]) == 1
    assert "bogus" in capsys.readouterr().err
    bad_bool = tmp_path / "b.cfg"
    bad_bool.write_text("check=maybe\n")
    assert main(["perimeter-ref", "--config", str(bad_bool)]) == 1
    bad_line = tmp_path / "c.cfg"
    bad_line.write_text("just words\n")
    assert main(["perimeter-ref", "--config", str(bad_line)]) == 1
    capsys.readouterr()


def test_out_dir_env_var(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("HYPERVOR_OUT", str(tmp_path))
    args = ["lemma", "--name", "inclusion", "--samples", "20000", "--seed", "77"]
    assert main(args + ["--out", "lemma.json"]) == 0
    assert (tmp_path / "lemma.json").exists()
    explicit = tmp_path / "sub"
    explicit.mkdir()
    assert main(args + ["--out", str(explicit / "lemma.json")]) == 0
    assert (explicit / "lemma.json").exists()
    capsys.readouterr()


# ---------------------------------------------------------------------------
# typical-cell and density


def test_typical_cell_csv_schema_and_check(tmp_path, capsys):
    out = tmp_path / "tc.csv"
    args = ["typical-cell", "--lambda", "1", "--replicas", "200", "--seed", "7",
            "--out", str(out), "--check"]
    assert main(args) == 0
    comments, cols, rows = read_csv(out)
    assert comments[0] == "# hypervor 0.1.0"
    assert comments[1].startswith("# config: ")
    assert "seed=7" in comments[1]
    assert "workers" not in comments[1]
    assert cols == ["lam", "quantity", "mean", "stderr", "n", "excluded", "target"]
    area, perim = rows
    assert area[1] == "area" and float(area[6]) == 1.0
    assert perim[1] == "perimeter"
    assert float(perim[6]) == pytest.approx(expected_perimeter(1.0), abs=1e-12)
    assert abs(float(area[2]) - 1.0) <= 3.0 * float(area[3])
    capsys.readouterr()


def test_typical_cell_determinism_across_workers(tmp_path, capsys):
    out = tmp_path / "tc.csv"
    runs = []
    for workers in ("1", "2"):
        assert main(["typical-cell", "--lambda", "1", "--replicas", "200",
                     "--seed", "7", "--workers", workers, "--out", str(out)]) == 0
        runs.append(out.read_bytes())
    assert runs[0] == runs[1]
    capsys.readouterr()


def test_stdout_when_no_out_path(capsys):
    assert main(["typical-cell", "--lambda", "1", "--replicas", "100", "--seed", "3"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("# hypervor 0.1.0\n# config: ")
    assert "lam,quantity,mean" in out


def test_density_check_fails_away_from_the_limit(tmp_path, capsys):
    out = tmp_path / "d.csv"
    args = ["density", "--lambda", "1", "--replicas", "200", "--seed", "3",
            "--out", str(out)]
    assert main(args) == 0
    plain = read_csv(out)
    assert main(args + ["--check"]) == 2
    printed = capsys.readouterr().out
    assert printed.startswith("check failed: ")
    assert "cell_ratio" in printed
    # the artifact is still written, with the same data rows
    assert read_csv(out)[2] == plain[2]
    cols = plain[1]
    assert cols == ["lam", "quantity", "value", "target", "rel_err", "n"]
    targets = {row[1]: float(row[3]) for row in plain[2]}
    assert targets["cell_ratio"] == pytest.approx(4.0 / math.pi, abs=1e-12)
    assert targets["union_density"] == pytest.approx(2.0 / math.pi, abs=1e-12)


# ---------------------------------------------------------------------------
# figures


def test_tessellate_writes_csv_and_svg(tmp_path, capsys):
    out, svg = tmp_path / "t.csv", tmp_path / "t.svg"
    args = ["tessellate", "--lambda", "1", "--radius", "3", "--seed", "31",
            "--out", str(out), "--svg", str(svg), "--color"]
    assert main(args) == 0
    comments, cols, rows = read_csv(out)
    assert cols == ["cell", "area", "sides", "rim_sides"]
    total = float(next(c for c in comments if "total_area" in c).split(": ")[1])
    assert total == pytest.approx(ball_area(3.0), rel=1e-9)
    assert sum(float(r[1]) for r in rows) == pytest.approx(total, rel=1e-9)
    text = svg.read_text()
    assert text.startswith('<?xml version="1.0" encoding="UTF-8"?>')
    first = svg.read_bytes()
    assert main(args) == 0
    assert svg.read_bytes() == first
    assert main(args[:-1]) == 0  # drop --color
    assert svg.read_bytes() != first
    capsys.readouterr()


def test_render_respects_spec_flags(tmp_path, capsys):
    svg = tmp_path / "r.svg"
    args = ["render", "--lambda", "1", "--radius", "3", "--seed", "31",
            "--svg", str(svg), "--width", "400", "--height", "400",
            "--stroke", "0.8", "--show-nuclei"]
    assert main(args) == 0
    text = svg.read_text()
    assert 'viewBox="0 0 400 400"' in text
    assert 'stroke-width="0.800000"' in text
    first = svg.read_bytes()
    assert main(args) == 0
    assert svg.read_bytes() == first
    assert main(["render", "--lambda", "1", "--radius", "3", "--width", "63",
                 "--svg", str(svg)]) == 1
    capsys.readouterr()


# ---------------------------------------------------------------------------
# surface and coloring


def test_surface_rows(tmp_path, capsys):
    out = tmp_path / "s.csv"
    assert main(["surface", "--lambda", "2", "--draws", "2", "--seed", "1",
                 "--out", str(out)]) == 0
    comments, cols, rows = read_csv(out)
    assert cols == ["draw", "cells", "total_area", "boundary_length", "density"]
    assert len(rows) == 2
    for r in rows:
        assert float(r[2]) == pytest.approx(4.0 * math.pi, rel=1e-9)
    assert any("planar_prediction" in c for c in comments)
    capsys.readouterr()


def test_color_check_passes(tmp_path, capsys):
    out = tmp_path / "c.csv"
    assert main(["color", "--lambda", "2", "--trials", "100", "--seed", "5",
                 "--out", str(out), "--check"]) == 0
    _, cols, rows = read_csv(out)
    assert cols == ["trial", "black_area", "boundary_length", "cheeger", "cells"]
    assert len(rows) == 100
    blacks = [float(r[1]) for r in rows]
    assert 0.0 <= min(blacks) and max(blacks) <= 4.0 * math.pi
    capsys.readouterr()


# ---------------------------------------------------------------------------
# graphs


def test_graph_region_rows_and_check(tmp_path, capsys):
    out = tmp_path / "g.csv"
    args = ["graph", "--n", "10000", "--d", "3", "--s", "50", "--trials", "100",
            "--seed", "9", "--out", str(out), "--check"]
    assert main(args) == 0
    _, cols, rows = read_csv(out)
    assert cols == ["n", "d", "s", "trial", "boundary_edges", "black_count",
                    "h_star", "seed"]
    assert len(rows) == 100
    assert rows[0][:3] == ["10000", "3", "50"] and rows[0][7] == "9"
    mean_h = sum(float(r[6]) for r in rows) / len(rows)
    assert mean_h <= 0.575
    # the asymptotic band genuinely fails at toy scale
    assert main(["graph", "--n", "60", "--d", "3", "--s", "5", "--trials", "50",
                 "--seed", "9", "--out", str(out), "--check"]) == 2
    capsys.readouterr()


def test_graph_half_coloring_mode(tmp_path, capsys):
    out = tmp_path / "h.csv"
    assert main(["graph", "--n", "100", "--d", "3", "--s", "0", "--trials", "200",
                 "--seed", "4", "--out", str(out), "--check"]) == 0
    _, _, rows = read_csv(out)
    assert all(r[5] == "50" for r in rows)
    capsys.readouterr()


def test_exact_cheeger_json(tmp_path, capsys):
    out = tmp_path / "x.json"
    assert main(["exact-cheeger", "--n", "10", "--d", "3", "--seed", "1",
                 "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["artifact_version"] == "0.1.0"
    assert doc["seed"] == 1 and doc["n"] == 10 and doc["d"] == 3
    expected = exact_cheeger(random_regular(10, 3, Seed(1)))
    assert doc["h"] == pytest.approx(expected, abs=1e-15)
    assert main(["exact-cheeger", "--n", "24", "--d", "3", "--seed", "1"]) == 1
    capsys.readouterr()


# ---------------------------------------------------------------------------
# lemmas


def test_lemma_json_schema_and_determinism(tmp_path, capsys):
    out = tmp_path / "l.json"
    args = ["lemma", "--name", "inclusion", "--samples", "20000", "--seed", "77",
            "--out", str(out)]
    assert main(args) == 0
    doc = json.loads(out.read_text())
    assert doc["lemma"] == "inclusion"
    assert doc["verdict"] == "pass"
    assert doc["max_slack"] < 0.0
    assert doc["samples"] == 20000
    assert doc["params"] == {"r": 5.0, "eps": 0.01, "delta": 0.1}
    assert doc["config"]["seed"] == 77 and "workers" not in doc["config"]
    first = out.read_bytes()
    assert main(args) == 0
    assert out.read_bytes() == first
    capsys.readouterr()


def test_lemma_negative_control_exits_2(capsys):
    assert main(["lemma", "--name", "inclusion", "--delta", "-0.5",
                 "--samples", "20000", "--seed", "78", "--check"]) == 2
    printed = capsys.readouterr().out
    assert "check failed" in printed and "verdict=fail" in printed


def test_lemma_sine_kernel_passes(capsys):
    assert main(["lemma", "--name", "sine-kernel", "--seed", "12", "--check"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["verdict"] == "pass"
    assert doc["max_slack"] <= 1e-9
