"""Tests for the command-line front end."""

import csv
import json
import math

import pytest

from geodetect.cli import main
from geodetect.graphs import Graph


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def strip_wall(rows):
    return [{k: v for k, v in row.items() if k != "wall_ms"} for row in rows]


BASE_CONFIG = """
[model]
n = 40
p = 0.5
d = 8
k = 20

[run]
trials = 40
seed = 7

[test.global-triangle]
"""


class TestTauCommand:
    def test_symmetric_point(self, capsys):
        assert main(["tau", "--p", "0.5", "--d", "32"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["tau"] == 0.0
        assert out["residual"] <= 1e-10

    def test_bound_reported(self, capsys):
        assert main(["tau", "--p", "0.3", "--d", "100"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert 0 < out["tau"] <= out["upper_bound"]
        assert out["upper_bound"] == pytest.approx(math.sqrt(3 * math.log(1 / 0.3) / 100))

    def test_regression_value(self, capsys):
        assert main(["tau", "--p", "0.1", "--d", "16"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["tau"] == pytest.approx(0.32710130942171891666, abs=1e-10)


class TestCycleExpectationCommand:
    def test_fields(self, capsys):
        assert main(["cycle-expectation", "--ell", "3", "--p", "0.3", "--d", "64"]) == 0
        out = json.loads(capsys.readouterr().out)
        for key in ("value", "truncation_m", "tail_bound", "scale", "ratio"):
            assert key in out
        assert out["ratio"] == pytest.approx(out["value"] / out["scale"])
        assert 1 / 20 <= out["ratio"] <= 20

    def test_triangle_lower_bound_with_calibrated_constant(self, capsys):
        # ell = 3 value >= scale / C for a desk-calibrated C
        assert main(["cycle-expectation", "--ell", "3", "--p", "0.3", "--d", "256"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["value"] >= out["scale"] / 20.0


class TestTestCommand:
    def test_single_point_row(self, tmp_path):
        cfg = tmp_path / "cfg.ini"
        cfg.write_text(BASE_CONFIG)
        out = tmp_path / "rows.csv"
        assert main(["test", "--config", str(cfg), "--out", str(out)]) == 0
        rows = read_rows(out)
        assert len(rows) == 1
        row = rows[0]
        assert row["test"] == "global-triangle"
        assert row["n"] == "40" and row["trials"] == "40"
        assert 0.0 <= float(row["type1"]) <= 1.0

    def test_deterministic_rerun(self, tmp_path):
        cfg = tmp_path / "cfg.ini"
        cfg.write_text(BASE_CONFIG)
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        main(["test", "--config", str(cfg), "--out", str(out1)])
        main(["test", "--config", str(cfg), "--out", str(out2)])
        assert strip_wall(read_rows(out1)) == strip_wall(read_rows(out2))

    def test_numerical_failure_in_row(self, tmp_path):
        # d = 3 passes model validation but the series needs d >= 4
        cfg = tmp_path / "cfg.ini"
        cfg.write_text(BASE_CONFIG.replace("d = 8", "d = 3"))
        out = tmp_path / "rows.csv"
        assert main(["test", "--config", str(cfg), "--out", str(out)]) == 0
        row = read_rows(out)[0]
        assert row["threshold"] == "nan"
        assert main(["--strict", "test", "--config", str(cfg), "--out", str(out)]) == 3


class TestSweepCommand:
    def test_axes_and_resume(self, tmp_path):
        cfg = tmp_path / "cfg.ini"
        cfg.write_text(BASE_CONFIG + "\n[sweep]\nd = 8,64\n")
        out = tmp_path / "grid.csv"
        assert main(["sweep", "--config", str(cfg), "--out", str(out)]) == 0
        first = read_rows(out)
        assert [row["d"] for row in first] == ["8", "64"]
        # a resumed run skips every completed point and appends nothing
        assert main(["sweep", "--config", str(cfg), "--out", str(out), "--resume"]) == 0
        assert strip_wall(read_rows(out)) == strip_wall(first)

    def test_worker_counts_agree(self, tmp_path):
        cfg = tmp_path / "cfg.ini"
        cfg.write_text(BASE_CONFIG + "\n[sweep]\nd = 8,16,32\n")
        out1, out8 = tmp_path / "w1.csv", tmp_path / "w8.csv"
        main(["sweep", "--config", str(cfg), "--out", str(out1), "--workers", "1"])
        main(["sweep", "--config", str(cfg), "--out", str(out8), "--workers", "8"])
        assert strip_wall(read_rows(out1)) == strip_wall(read_rows(out8))

    def test_empty_axes_matches_test_command(self, tmp_path):
        cfg = tmp_path / "cfg.ini"
        cfg.write_text(BASE_CONFIG)
        out_sweep, out_test = tmp_path / "s.csv", tmp_path / "t.csv"
        assert main(["sweep", "--config", str(cfg), "--out", str(out_sweep)]) == 0
        assert main(["test", "--config", str(cfg), "--out", str(out_test)]) == 0
        assert strip_wall(read_rows(out_sweep)) == strip_wall(read_rows(out_test))

    def test_logrange_axis(self, tmp_path):
        cfg = tmp_path / "cfg.ini"
        cfg.write_text(BASE_CONFIG + "\n[sweep]\nd = logrange:4:4096:4\n")
        out = tmp_path / "grid.csv"
        assert main(["sweep", "--config", str(cfg), "--out", str(out)]) == 0
        assert [row["d"] for row in read_rows(out)] == ["4", "40", "406", "4096"]


class TestConfigValidation:
    def test_unknown_key_rejected(self, tmp_path):
        cfg = tmp_path / "cfg.ini"
        cfg.write_text(BASE_CONFIG + "\n[sweep]\ndd = 8,64\n")
        assert main(["sweep", "--config", str(cfg), "--out", "x.csv"]) == 2

    def test_unknown_section_rejected(self, tmp_path):
        cfg = tmp_path / "cfg.ini"
        cfg.write_text(BASE_CONFIG + "\n[mystery]\na = 1\n")
        assert main(["test", "--config", str(cfg), "--out", "x.csv"]) == 2

    def test_missing_model_rejected(self, tmp_path):
        cfg = tmp_path / "cfg.ini"
        cfg.write_text("[run]\ntrials = 5\n")
        assert main(["test", "--config", str(cfg), "--out", "x.csv"]) == 2

    def test_missing_file_rejected(self, tmp_path):
        assert main(["test", "--config", str(tmp_path / "nope.ini"), "--out", "x.csv"]) == 2

    def test_scientific_notation_accepted(self, tmp_path):
        cfg = tmp_path / "cfg.ini"
        cfg.write_text(BASE_CONFIG.replace("d = 8", "d = 1e2"))
        out = tmp_path / "rows.csv"
        assert main(["test", "--config", str(cfg), "--out", str(out)]) == 0
        assert read_rows(out)[0]["d"] == "100"


class TestLowdegCommand:
    def test_report_shape(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.ini"
        cfg.write_text(
            "[model]\nn = 30\np = 0.5\nd = 8\nk = 15\n"
            "[lowdeg]\nv_max = 3\ndegree_cap = 3\ntrials = 4000\n"
        )
        assert main(["lowdeg", "--config", str(cfg), "--seed", "3"]) == 0
        out = json.loads(capsys.readouterr().out)
        rows = out["rows"]
        forests = [r for r in rows if r["is_forest"]]
        assert forests and all(r["skipped_analytic_zero"] for r in forests)
        assert all(r["phi"] == 0.0 for r in forests)
        assert out["triangle_crosscheck"] is not None
        assert "series_predicted" in out["triangle_crosscheck"]

    def test_writes_file(self, tmp_path):
        cfg = tmp_path / "cfg.ini"
        cfg.write_text(
            "[model]\nn = 30\np = 0.5\nd = 8\nk = 15\n"
            "[lowdeg]\nv_max = 2\ndegree_cap = 2\ntrials = 100\n"
        )
        out = tmp_path / "report.json"
        assert main(["lowdeg", "--config", str(cfg), "--out", str(out)]) == 0
        assert json.loads(out.read_text())["v_max"] == 2


class TestWishartCommand:
    def test_report(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.ini"
        cfg.write_text(
            "[model]\nn = 16\np = 0.5\nd = 400\nk = 8\n"
            "[wishart]\nk = 8\nd = 400\ntrials = 100\nn = 16\ncommunity_size = 8\np = 0.5\n"
        )
        assert main(["wishart", "--config", str(cfg), "--seed", "5"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["k1_deviation"] == 0.0
        assert out["spectral"]["within_10x_fraction"] >= 0.99
        route = out["route_check"]
        assert abs(route["edge_marginal"]["composite"] - 0.5) <= 0.05
        assert abs(route["edge_marginal"]["direct"] - 0.5) <= 0.05


class TestSampleCommand:
    def test_edgelist_round_trip(self, tmp_path):
        out = tmp_path / "graph.txt"
        assert main([
            "sample", "--model", "null", "--n", "12", "--p", "0.4",
            "--seed", "3", "--format", "edgelist", "--out", str(out),
        ]) == 0
        g = Graph.from_edgelist_text(out.read_text())
        assert g.n == 12

    def test_bitfield_round_trip(self, tmp_path):
        out = tmp_path / "graph.bin"
        assert main([
            "sample", "--model", "planted", "--n", "15", "--p", "0.4", "--d", "6",
            "--k", "8", "--seed", "3", "--format", "bits", "--out", str(out),
        ]) == 0
        g = Graph.from_bitfield_bytes(out.read_bytes())
        assert g.n == 15

    def test_formats_encode_same_graph(self, tmp_path):
        a, b = tmp_path / "g.txt", tmp_path / "g.bin"
        args = ["sample", "--model", "geometric", "--n", "10", "--p", "0.3",
                "--d", "5", "--seed", "11"]
        assert main(args + ["--format", "edgelist", "--out", str(a)]) == 0
        assert main(args + ["--format", "bits", "--out", str(b)]) == 0
        assert Graph.from_edgelist_text(a.read_text()) == Graph.from_bitfield_bytes(
            b.read_bytes()
        )
