#!/usr/bin/env python3
"""Quick desk-scale comparison of client samplers on one synthetic problem.

Runs uniform, adaptive, and oracle sampling on a small heterogeneous
regression problem and prints final training loss and cumulative regret per
sampler.  Handy smoke test; the full preset sweeps live behind the CLI.
"""

import argparse
import time

from adasamp import SyntheticConfig, TrainConfig, generate_synthetic, run_experiment


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--clients", type=int, default=50)
    parser.add_argument("--rounds", type=int, default=500)
    parser.add_argument("--sigma", type=float, default=10.0)
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args()

    problem = generate_synthetic(
        SyntheticConfig(
            M=args.clients, n_m=50, d=10, kappa=25.0, sigma=args.sigma, seed=args.seed
        )
    )
    print(
        f"problem: M={args.clients} clients, sigma={args.sigma}, "
        f"T={args.rounds} rounds, seed={args.seed}"
    )
    print(f"{'sampler':24s} {'final loss':>12s} {'cum regret':>12s} {'time':>8s}")
    for kind in ("uniform", "adaptive-osmd", "adaptive-doubling-osmd", "oracle-optimal"):
        cfg = TrainConfig(
            K=5, batch=10, T=args.rounds, sampler_kind=kind, alpha=0.4, seed=args.seed
        )
        start = time.perf_counter()
        records, ledger = run_experiment(problem, cfg)
        elapsed = time.perf_counter() - start
        print(
            f"{kind:24s} {records[-1].train_loss:12.5f} "
            f"{ledger.final_regret:12.2f} {elapsed:7.2f}s"
        )


if __name__ == "__main__":
    main()
