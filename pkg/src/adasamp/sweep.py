"""Execute experiment sweeps and write the results CSV plus summary.

One row per (run, round) goes into ``results.csv`` with a fixed column
schema; ``summary.json`` holds each run's final training loss and final
cumulative regret plus mean and standard deviation per sampler group (the
group is everything but the seed).  Output is deterministic: runs execute in
config order, floats are written with full round-trip precision, and a rerun
with the same config produces byte-identical files.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace
from itertools import product
from pathlib import Path

import numpy as np

from .config import DatasetPaths, ExperimentConfig
from .problems import FederatedProblem, generate_synthetic, ingest_csv
from .simulator import RegretLedger, RoundRecord, TrainConfig, run_experiment

logger = logging.getLogger(__name__)

CSV_COLUMNS = (
    "run_id",
    "sampler",
    "sigma",
    "alpha",
    "replacement",
    "seed",
    "t",
    "train_loss",
    "sampler_loss",
    "oracle_loss",
    "cum_regret",
    "tv_pstar",
)


@dataclass(frozen=True)
class RunSpec:
    """One point of the sweep grid."""

    run_id: str
    sampler: str
    sigma: float | None
    alpha: float
    replacement: str
    seed: int
    training: TrainConfig


@dataclass
class SweepResult:
    results_path: Path
    summary_path: Path
    completed: list[str] = field(default_factory=list)
    failures: dict[str, str] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.failures


def expand_runs(cfg: ExperimentConfig) -> list[RunSpec]:
    """Materialize the sweep grid in deterministic config order."""
    synthetic = not isinstance(cfg.problem, DatasetPaths)
    samplers = cfg.samplers or [cfg.training.sampler_kind]
    sigmas = cfg.sigmas or ([cfg.problem.sigma] if synthetic else [None])
    alphas = cfg.alphas or [cfg.training.alpha]
    replacements = cfg.replacements or [cfg.training.replacement]
    seeds = cfg.seeds or [cfg.training.seed]

    specs = []
    grid = product(samplers, sigmas, alphas, replacements, seeds)
    for i, (sampler, sigma, alpha, repl, seed) in enumerate(grid):
        training = replace(
            cfg.training,
            sampler_kind=sampler,
            alpha=alpha,
            replacement=repl,
            seed=seed,
        )
        specs.append(
            RunSpec(
                run_id=f"r{i:03d}-{sampler}-seed{seed}",
                sampler=sampler,
                sigma=sigma,
                alpha=alpha,
                replacement=repl,
                seed=seed,
                training=training,
            )
        )
    return specs


def _build_problem(cfg: ExperimentConfig, sigma: float | None, cache: dict) -> FederatedProblem:
    if isinstance(cfg.problem, DatasetPaths):
        key = "dataset"
        if key not in cache:
            cache[key] = ingest_csv(
                cfg.problem.features, cfg.problem.labels, cfg.problem.partition
            )
        return cache[key]
    key = float(sigma)
    if key not in cache:
        cache[key] = generate_synthetic(replace(cfg.problem, sigma=key))
    return cache[key]


def _fmt(value) -> str:
    return repr(float(value))


def run_rows(spec: RunSpec, records: list[RoundRecord], ledger: RegretLedger):
    sigma = "" if spec.sigma is None else _fmt(spec.sigma)
    for rec, cum, tv in zip(records, ledger.cum_regret, ledger.tv_pstar):
        yield (
            spec.run_id,
            spec.sampler,
            sigma,
            _fmt(spec.alpha),
            spec.replacement,
            str(spec.seed),
            str(rec.t),
            _fmt(rec.train_loss),
            _fmt(rec.sampler_loss),
            _fmt(rec.oracle_loss),
            _fmt(cum),
            _fmt(tv),
        )


def _group_key(spec: RunSpec) -> str:
    sigma = "" if spec.sigma is None else _fmt(spec.sigma)
    return (
        f"sampler={spec.sampler}|sigma={sigma}|alpha={_fmt(spec.alpha)}"
        f"|replacement={spec.replacement}"
    )


def summarize(finals: list[dict]) -> dict:
    """Per-run finals plus mean/std per sampler group (sample std, ddof=1)."""
    groups: dict[str, list[dict]] = {}
    for row in finals:
        groups.setdefault(row["group"], []).append(row)
    group_stats = {}
    for key in sorted(groups):
        rows = groups[key]
        losses = np.array([r["final_train_loss"] for r in rows])
        regrets = np.array([r["final_cum_regret"] for r in rows])
        n = len(rows)
        group_stats[key] = {
            "sampler": rows[0]["sampler"],
            "sigma": rows[0]["sigma"],
            "alpha": rows[0]["alpha"],
            "replacement": rows[0]["replacement"],
            "n": n,
            "mean_final_train_loss": float(losses.mean()),
            "std_final_train_loss": float(losses.std(ddof=1)) if n > 1 else 0.0,
            "mean_final_cum_regret": float(regrets.mean()),
            "std_final_cum_regret": float(regrets.std(ddof=1)) if n > 1 else 0.0,
        }
    return group_stats


def run_sweep(cfg: ExperimentConfig, out_dir=None) -> SweepResult:
    """Run every point of the sweep, then write results.csv and summary.json.

    A failing run is recorded (and logged) without stopping the sweep; its
    rows are simply absent from the CSV.
    """
    out = Path(out_dir if out_dir is not None else cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    specs = expand_runs(cfg)
    cache: dict = {}
    result = SweepResult(
        results_path=out / "results.csv", summary_path=out / "summary.json"
    )

    all_rows = []
    finals = []
    for spec in specs:
        try:
            problem = _build_problem(cfg, spec.sigma, cache)
            records, ledger = run_experiment(problem, spec.training)
        except Exception as exc:  # noqa: BLE001 - per-run isolation is the contract
            logger.warning("run %s failed: %s", spec.run_id, exc)
            result.failures[spec.run_id] = f"{type(exc).__name__}: {exc}"
            continue
        all_rows.extend(run_rows(spec, records, ledger))
        finals.append(
            {
                "run_id": spec.run_id,
                "group": _group_key(spec),
                "sampler": spec.sampler,
                "sigma": None if spec.sigma is None else float(spec.sigma),
                "alpha": float(spec.alpha),
                "replacement": spec.replacement,
                "seed": spec.seed,
                "final_train_loss": records[-1].train_loss,
                "final_cum_regret": ledger.final_regret,
            }
        )
        result.completed.append(spec.run_id)

    with open(result.results_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for row in all_rows:
            fh.write(",".join(row) + "\n")

    summary = {
        "config": cfg.name,
        "runs": [{k: v for k, v in row.items() if k != "group"} for row in finals],
        "groups": summarize(finals),
        "failures": result.failures,
    }
    with open(result.summary_path, "w", encoding="utf-8", newline="") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return result
