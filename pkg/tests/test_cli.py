import json

import numpy as np
import pytest
from click.testing import CliRunner

from sea.cli import main
from sea.graph import Dag, from_text


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, args):
    result = runner.invoke(main, args, standalone_mode=False, catch_exceptions=False)
    return result


def make_dataset(runner, tmp_path, n=8, edges=8, m=2000, seed="5"):
    out = tmp_path / "data.csv"
    res = invoke(
        runner,
        ["--seed", seed, "generate", "--n", str(n), "--edges", str(edges),
         "--m", str(m), "--out", str(out)],
    )
    assert res.exit_code == 0
    return out


class TestGenerate:
    def test_writes_dataset_and_sidecars(self, runner, tmp_path):
        out = make_dataset(runner, tmp_path)
        assert out.exists()
        assert out.with_suffix(".graph").exists()
        assert out.with_suffix(".scm.json").exists()
        rows = np.loadtxt(out, delimiter=",", skiprows=1)
        assert rows.shape == (2000, 8)
        truth = from_text(out.with_suffix(".graph").read_text())
        assert isinstance(truth, Dag)

    def test_seed_reproducible(self, runner, tmp_path):
        a = make_dataset(runner, tmp_path / "a")
        b = make_dataset(runner, tmp_path / "b")
        assert a.read_bytes() == b.read_bytes()


class TestDiscover:
    def test_pc_writes_pattern_and_scores(self, runner, tmp_path):
        data = make_dataset(runner, tmp_path)
        out = tmp_path / "pred.graph"
        res = invoke(runner, ["discover", "--data", str(data), "--out", str(out)])
        assert res.exit_code == 0
        assert out.exists()
        assert out.with_suffix(".scores.csv").exists()

    def test_varsort(self, runner, tmp_path):
        data = make_dataset(runner, tmp_path)
        out = tmp_path / "pred.graph"
        res = invoke(
            runner,
            ["discover", "--data", str(data), "--algorithm", "varsort",
             "--out", str(out)],
        )
        assert res.exit_code == 0


class TestResolve:
    def test_end_to_end_on_cached_data(self, runner, tmp_path):
        data = make_dataset(runner, tmp_path)
        out_dir = tmp_path / "run"
        res = invoke(
            runner,
            ["--seed", "5", "resolve", "--data", str(data), "--t", "10",
             "--k", "4", "--b", "200", "--out-dir", str(out_dir)],
        )
        assert res.exit_code == 0
        doc = json.loads((out_dir / "results.json").read_text())
        assert doc["config"]["t_count"] == 10

    def test_config_file(self, runner, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({
            "n": 8, "expected_edges": 8, "m": 2000, "t_count": 8,
            "subset_size": 4, "batch_size": 200, "seed": 9,
            "out_dir": str(tmp_path / "run"),
        }))
        res = invoke(runner, ["--config", str(cfg_path), "resolve"])
        assert res.exit_code == 0
        assert (tmp_path / "run" / "results.json").exists()


class TestEvaluate:
    def test_scores_against_truth(self, runner, tmp_path):
        data = make_dataset(runner, tmp_path)
        run_dir = tmp_path / "run"
        invoke(
            runner,
            ["--seed", "5", "resolve", "--data", str(data), "--t", "10",
             "--k", "4", "--b", "200", "--out-dir", str(run_dir)],
        )
        report = tmp_path / "report.json"
        res = invoke(
            runner,
            ["evaluate", "--scores", str(run_dir / "scores.csv"),
             "--truth", str(data.with_suffix(".graph")), "--out", str(report)],
        )
        assert res.exit_code == 0
        doc = json.loads(report.read_text())
        assert "shd_cpdag" in doc and "auroc" in doc

    def test_float_threshold(self, runner, tmp_path):
        truth = tmp_path / "truth.graph"
        from sea.graph import to_text

        truth.write_text(to_text(Dag.from_edges(2, [(0, 1)])))
        scores = tmp_path / "scores.csv"
        np.savetxt(scores, np.array([[0.0, 0.9], [0.1, 0.0]]), delimiter=",")
        res = invoke(
            runner,
            ["evaluate", "--scores", str(scores), "--truth", str(truth),
             "--threshold", "0.2"],
        )
        assert res.exit_code == 0
        assert json.loads(res.output)["shd_dag"] == 0


class TestExportFeatures:
    def test_bundle_round_trip(self, runner, tmp_path):
        data = make_dataset(runner, tmp_path)
        out = tmp_path / "features.json"
        res = invoke(
            runner,
            ["--seed", "5", "export-features", "--data", str(data),
             "--t", "6", "--k", "4", "--b", "200", "--out", str(out)],
        )
        assert res.exit_code == 0
        doc = json.loads(out.read_text())
        assert doc["n"] == 8
        assert len(doc["subsets"]) == 6
        assert len(doc["marks"]) == 6


class TestPlot:
    def test_writes_svg(self, runner, tmp_path):
        docs = []
        for t in (5, 10):
            p = tmp_path / f"r{t}.json"
            p.write_text(json.dumps({
                "config": {"t_count": t}, "shd_cpdag": 10 - t // 2, "map": t / 20,
            }))
            docs.append(str(p))
        out = tmp_path / "curve.svg"
        res = invoke(runner, ["plot", *docs, "--out", str(out)])
        assert res.exit_code == 0
        assert out.read_text().lstrip().startswith("<?xml")


class TestExitCodes:
    def test_config_error_exits_2(self, runner, tmp_path, monkeypatch):
        import subprocess
        import sys

        res = subprocess.run(
            [sys.executable, "-m", "sea.cli", "resolve", "--t", "0",
             "--out-dir", str(tmp_path / "x")],
            capture_output=True,
        )
        assert res.returncode == 2

    def test_data_error_exits_3(self, runner, tmp_path):
        import subprocess
        import sys

        # enough columns for the default config but far too few rows
        bad = tmp_path / "bad.csv"
        header = ",".join(f"c{i}" for i in range(10))
        row = ",".join("1.0" for _ in range(10))
        bad.write_text(header + "\n" + "\n".join([row] * 5) + "\n")
        res = subprocess.run(
            [sys.executable, "-m", "sea.cli", "resolve", "--data", str(bad),
             "--out-dir", str(tmp_path / "x")],
            capture_output=True,
        )
        assert res.returncode == 3

    def test_unknown_option_exits_2(self, runner, tmp_path):
        import subprocess
        import sys

        res = subprocess.run(
            [sys.executable, "-m", "sea.cli", "resolve", "--bogus"],
            capture_output=True,
        )
        assert res.returncode == 2
