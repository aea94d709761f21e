import json

import numpy as np
import pytest

from odyn.cli import main
from odyn.fixtures import toy_graph, toy_initial_state
from odyn.graphs import save_graph_json, save_matrix_csv


class TestValidation:
    def test_unknown_verb_is_validation_error(self, capsys):
        assert main(["frobnicate"]) == 1
        assert "error" in capsys.readouterr().err

    def test_unknown_flag_is_validation_error(self, capsys):
        assert main(["toy", "--frobnicate"]) == 1

    def test_unknown_kernel(self, capsys):
        assert main(["simulate", "--kernel", "heat"]) == 1

    def test_step_guard_maps_to_validation_exit(self, tmp_path):
        assert main(["simulate", "--kernel", "bimp", "--dt", "2.0", "--d", "1.0",
                     "--out", str(tmp_path)]) == 1

    def test_unknown_config_key(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"frobnicate": 1}))
        assert main(["toy", "--config", str(cfg), "--out", str(tmp_path)]) == 1


class TestToy:
    def test_writes_four_trajectories(self, tmp_path):
        out = tmp_path / "toy"
        assert main(["toy", "--out", str(out), "--seed", "0"]) == 0
        for name in ("grand-l", "grand++-l", "graphcon-tran", "bimp"):
            path = out / f"{name}.csv"
            assert path.exists()
            assert path.read_text().splitlines()[0] == "t,node,option,value"

    def test_seeded_runs_are_byte_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["toy", "--out", str(a), "--seed", "3"]) == 0
        assert main(["toy", "--out", str(b), "--seed", "3"]) == 0
        for name in ("grand-l", "grand++-l", "graphcon-tran", "bimp"):
            assert (a / f"{name}.csv").read_bytes() == (b / f"{name}.csv").read_bytes()


class TestSimulate:
    def test_custom_graph_and_state(self, tmp_path):
        gpath = tmp_path / "g.json"
        xpath = tmp_path / "x.csv"
        save_graph_json(toy_graph(), gpath)
        save_matrix_csv(toy_initial_state(), xpath)
        out = tmp_path / "sim"
        code = main([
            "simulate", "--kernel", "laplacian", "--graph", str(gpath),
            "--init", str(xpath), "--steps", "50", "--out", str(out),
        ])
        assert code == 0
        assert (out / "laplacian.csv").exists()
        assert (out / "laplacian-metrics.csv").exists()

    def test_state_graph_mismatch(self, tmp_path):
        gpath = tmp_path / "g.json"
        xpath = tmp_path / "x.csv"
        save_graph_json(toy_graph(), gpath)
        save_matrix_csv(np.zeros((2, 2)), xpath)
        assert main(["simulate", "--graph", str(gpath), "--init", str(xpath)]) == 1

    def test_config_file_with_flag_override(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"kernel": "laplacian", "steps": 10, "dt": 0.05}))
        out = tmp_path / "sim"
        code = main([
            "simulate", "--config", str(cfg), "--kernel", "linear-od",
            "--out", str(out),
        ])
        assert code == 0
        # the flag overrides the config kernel
        assert (out / "linear-od.csv").exists()
        assert not (out / "laplacian.csv").exists()


class TestBifurcation:
    def test_branch_count_changes_at_critical_attention(self, tmp_path):
        out = tmp_path / "bif.csv"
        code = main([
            "bifurcation", "--d", "1", "--alpha", "1", "--u-min", "0.05",
            "--u-max", "0.6", "--points", "112", "--out", str(out),
        ])
        assert code == 0
        counts = {}
        for line in out.read_text().splitlines()[1:]:
            u = float(line.split(",")[0])
            counts[u] = counts.get(u, 0) + 1
        below = [c for u, c in counts.items() if u < 0.24]
        above = [c for u, c in counts.items() if u > 0.26]
        assert set(below) == {1} and set(above) == {3}

    def test_stdout_mode(self, capsys):
        assert main(["bifurcation", "--points", "3", "--u-min", "0.1",
                     "--u-max", "0.2"]) == 0
        captured = capsys.readouterr()
        assert captured.out.splitlines()[0] == "u,y,stable"


class TestGradcheckAndTrain:
    def test_gradcheck_json(self, tmp_path, capsys):
        out = tmp_path / "grad.json"
        assert main(["gradcheck", "--seed", "5", "--out", str(out)]) == 0
        payload = json.loads(out.read_text())
        assert payload["rel_error"] < 1e-5
        assert payload["within_bound"] is True

    def test_train_history(self, tmp_path):
        out = tmp_path / "train"
        code = main([
            "train", "--epochs", "5", "--seed", "1", "--out", str(out),
        ])
        assert code == 0
        lines = (out / "history.csv").read_text().splitlines()
        assert lines[0] == "epoch,loss,accuracy"
        assert len(lines) == 1 + 5 + 1
        assert (out / "weights.csv").exists()


class TestPlot:
    def test_trajectory_plot(self, tmp_path):
        out = tmp_path / "toy"
        main(["toy", "--out", str(out), "--seed", "0", "--steps", "20"])
        svg = tmp_path / "bimp.svg"
        assert main(["plot", "--in", str(out / "bimp.csv"), "--out", str(svg)]) == 0
        body = svg.read_text()
        assert body.startswith("<svg")
        assert "polyline" in body
        assert "http" not in body.replace("http://www.w3.org/2000/svg", "")

    def test_metrics_and_bifurcation_schemas(self, tmp_path):
        out = tmp_path / "toy"
        main(["toy", "--out", str(out), "--seed", "0", "--steps", "20"])
        assert main(["plot", "--in", str(out / "bimp-metrics.csv"),
                     "--out", str(tmp_path / "m.svg")]) == 0
        bif = tmp_path / "bif.csv"
        main(["bifurcation", "--points", "20", "--out", str(bif)])
        assert main(["plot", "--in", str(bif), "--out", str(tmp_path / "b.svg")]) == 0
        assert "circle" in (tmp_path / "b.svg").read_text()

    def test_unknown_schema_rejected(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b\n1,2\n")
        assert main(["plot", "--in", str(bad), "--out", str(tmp_path / "x.svg")]) == 1


class TestVerify:
    def test_report_structure_and_exit_contract(self, tmp_path):
        out = tmp_path / "report.json"
        code = main(["verify", "--out", str(out)])
        report = json.loads(out.read_text())
        assert len(report) == 12
        assert {r["name"] for r in report} >= {
            "toy-figure",
            "leading-eigenvalue",
            "bifurcation-structure",
            "critical-consensus",
            "gradient-suite",
            "training-smoke",
        }
        all_passed = all(r["passed"] for r in report)
        assert code == (0 if all_passed else 3)
