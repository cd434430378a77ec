"""CLI subcommands, sweep output files, and the summary cross-check."""

import csv
import json

import numpy as np
import pytest

from adasamp.cli import main
from adasamp.config import ExperimentConfig
from adasamp.problems import SyntheticConfig
from adasamp.simulator import TrainConfig
from adasamp.sweep import CSV_COLUMNS, run_sweep

SMALL_CONFIG = """\
[problem]
kind = synthetic
M = 8
n_m = 10
d = 3
kappa = 25
sigma = 3.0
seed = 5

[training]
K = 2
T = 15
batch = 4
mu_sgd = 0.1
alpha = 0.4

[sweep]
samplers = uniform, adaptive-osmd
seeds = 1, 2

[output]
directory = results
"""


def small_sweep_config(**overrides):
    base = dict(
        name="small",
        problem=SyntheticConfig(M=8, n_m=10, d=3, kappa=25.0, sigma=3.0, seed=5),
        training=TrainConfig(K=2, batch=4, T=15, alpha=0.4),
        samplers=["uniform", "adaptive-osmd"],
        seeds=[1, 2],
    )
    base.update(overrides)
    return ExperimentConfig(**base)


class TestRunSweep:
    def test_writes_results_and_summary(self, tmp_path):
        result = run_sweep(small_sweep_config(), out_dir=tmp_path)
        assert result.ok
        assert result.results_path.exists()
        assert result.summary_path.exists()
        with open(result.results_path, encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 4 * 15
        assert tuple(rows[0].keys()) == CSV_COLUMNS

    def test_header_schema_golden(self, tmp_path):
        run_sweep(small_sweep_config(), out_dir=tmp_path)
        header = (tmp_path / "results.csv").read_text(encoding="utf-8").splitlines()[0]
        assert header == (
            "run_id,sampler,sigma,alpha,replacement,seed,t,"
            "train_loss,sampler_loss,oracle_loss,cum_regret,tv_pstar"
        )

    def test_rows_ordered_by_run_then_round(self, tmp_path):
        result = run_sweep(small_sweep_config(), out_dir=tmp_path)
        with open(result.results_path, encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        keys = [(r["run_id"], int(r["t"])) for r in rows]
        assert keys == sorted(keys)

    def test_rerun_byte_identical(self, tmp_path):
        run_sweep(small_sweep_config(), out_dir=tmp_path / "a")
        run_sweep(small_sweep_config(), out_dir=tmp_path / "b")
        assert (tmp_path / "a/results.csv").read_bytes() == (
            tmp_path / "b/results.csv"
        ).read_bytes()
        assert (tmp_path / "a/summary.json").read_bytes() == (
            tmp_path / "b/summary.json"
        ).read_bytes()

    def test_summary_matches_recomputation_from_csv(self, tmp_path):
        result = run_sweep(small_sweep_config(), out_dir=tmp_path)
        with open(result.results_path, encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        with open(result.summary_path, encoding="utf-8") as fh:
            summary = json.load(fh)
        finals = {}
        for row in rows:
            finals[row["run_id"]] = row  # last round wins: rows are ordered by t
        for run in summary["runs"]:
            row = finals[run["run_id"]]
            assert float(row["train_loss"]) == run["final_train_loss"]
            assert float(row["cum_regret"]) == run["final_cum_regret"]
        groups = {}
        for run in summary["runs"]:
            key = (run["sampler"], run["sigma"], run["alpha"], run["replacement"])
            groups.setdefault(key, []).append(run)
        for stats in summary["groups"].values():
            key = (stats["sampler"], stats["sigma"], stats["alpha"], stats["replacement"])
            members = groups[key]
            losses = np.array([r["final_train_loss"] for r in members])
            regrets = np.array([r["final_cum_regret"] for r in members])
            assert stats["n"] == len(members)
            assert stats["mean_final_train_loss"] == pytest.approx(losses.mean(), rel=1e-12)
            assert stats["mean_final_cum_regret"] == pytest.approx(regrets.mean(), rel=1e-12)
            expected_std = losses.std(ddof=1) if len(members) > 1 else 0.0
            assert stats["std_final_train_loss"] == pytest.approx(expected_std, rel=1e-12)

    def test_failed_run_recorded_without_abort(self, tmp_path):
        cfg = small_sweep_config(
            training=TrainConfig(K=2, batch=4, T=200, mu_sgd=80.0, alpha=0.4),
            samplers=["uniform"],
            seeds=[1],
        )
        result = run_sweep(cfg, out_dir=tmp_path)
        assert not result.ok
        assert len(result.failures) == 1
        with open(result.summary_path, encoding="utf-8") as fh:
            summary = json.load(fh)
        assert summary["failures"]


class TestCliCommands:
    def test_validate_ok(self, tmp_path, capsys):
        cfg_path = tmp_path / "exp.cfg"
        cfg_path.write_text(SMALL_CONFIG, encoding="utf-8")
        assert main(["validate", str(cfg_path)]) == 0
        assert "config OK" in capsys.readouterr().out

    def test_validate_bad_config(self, tmp_path, capsys):
        cfg_path = tmp_path / "exp.cfg"
        cfg_path.write_text(SMALL_CONFIG.replace("alpha = 0.4", "alpha = 2.0"), encoding="utf-8")
        assert main(["validate", str(cfg_path)]) == 2
        assert "config error" in capsys.readouterr().err

    def test_missing_config_file(self, capsys):
        assert main(["run", "/does/not/exist.cfg"]) == 2

    def test_run_writes_outputs(self, tmp_path, capsys):
        cfg_path = tmp_path / "exp.cfg"
        cfg_path.write_text(SMALL_CONFIG, encoding="utf-8")
        out = tmp_path / "out"
        assert main(["run", str(cfg_path), "--out", str(out)]) == 0
        assert (out / "results.csv").exists()
        assert (out / "summary.json").exists()

    def test_env_var_output_dir(self, tmp_path, capsys, monkeypatch):
        cfg_path = tmp_path / "exp.cfg"
        cfg_path.write_text(SMALL_CONFIG, encoding="utf-8")
        env_out = tmp_path / "env-out"
        monkeypatch.setenv("ADASAMP_OUT", str(env_out))
        assert main(["run", str(cfg_path)]) == 0
        assert (env_out / "results.csv").exists()

    def test_flag_beats_env(self, tmp_path, capsys, monkeypatch):
        cfg_path = tmp_path / "exp.cfg"
        cfg_path.write_text(SMALL_CONFIG, encoding="utf-8")
        monkeypatch.setenv("ADASAMP_OUT", str(tmp_path / "env-out"))
        flag_out = tmp_path / "flag-out"
        assert main(["run", str(cfg_path), "--out", str(flag_out)]) == 0
        assert (flag_out / "results.csv").exists()
        assert not (tmp_path / "env-out").exists()

    def test_unknown_preset_exits_2(self, capsys):
        assert main(["preset", "mystery"]) == 2

    def test_preset_seed_truncation_runs(self, tmp_path, capsys, monkeypatch):
        # truncating the seed list keeps presets affordable in smoke tests;
        # shrink the horizon by patching the preset table for this test only
        import adasamp.cli as cli_mod
        from adasamp.config import preset as real_preset
        from dataclasses import replace

        def tiny_preset(name):
            cfg = real_preset(name)
            cfg.training = replace(cfg.training, T=10)
            cfg.problem = replace(cfg.problem, M=6, n_m=8)
            return cfg

        monkeypatch.setattr(cli_mod, "preset", tiny_preset)
        out = tmp_path / "p"
        assert main(["preset", "synthetic-sigma10", "--out", str(out), "--seeds", "1"]) == 0
        with open(out / "summary.json", encoding="utf-8") as fh:
            summary = json.load(fh)
        assert len(summary["runs"]) == 3  # three samplers, one seed
