"""Command-line experiment runner.

Subcommands:

* ``run CONFIG``      - execute the sweep described by a config file
* ``preset NAME``     - execute a named built-in experiment preset
* ``validate CONFIG`` - parse and validate a config file, running nothing

The output directory resolves as: ``--out`` flag, then the ADASAMP_OUT
environment variable, then the config's ``[output] directory`` (presets
default to ``results``).  Exit codes: 0 on full success, 1 if any run
failed, 2 on a config error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .config import ConfigParseError, ConfigValidationError, parse_config, preset, presets
from .sweep import expand_runs, run_sweep

OUT_ENV_VAR = "ADASAMP_OUT"


def _resolve_out(flag_value, cfg):
    if flag_value:
        return flag_value
    env = os.environ.get(OUT_ENV_VAR)
    if env:
        return env
    return cfg.out_dir


def _execute(cfg, out_flag) -> int:
    result = run_sweep(cfg, out_dir=_resolve_out(out_flag, cfg))
    print(f"wrote {result.results_path}")
    print(f"wrote {result.summary_path}")
    print(f"runs completed: {len(result.completed)}, failed: {len(result.failures)}")
    for run_id, err in result.failures.items():
        print(f"  FAILED {run_id}: {err}", file=sys.stderr)
    return 0 if result.ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adasamp",
        description="Run adaptive client-sampling experiments and write CSV metrics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run the sweep described by a config file")
    run_p.add_argument("config", help="path to a config file")
    run_p.add_argument("--out", help="output directory (overrides config and env)")

    pre_p = sub.add_parser("preset", help="run a named built-in preset")
    pre_p.add_argument("name", help=f"one of: {', '.join(sorted(presets()))}")
    pre_p.add_argument("--out", help="output directory (overrides env and default)")
    pre_p.add_argument(
        "--seeds",
        type=int,
        help="run only the first N seeds of the preset (N >= 1)",
    )

    val_p = sub.add_parser("validate", help="validate a config file without running")
    val_p.add_argument("config", help="path to a config file")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)

    try:
        if args.command == "run":
            cfg = parse_config(args.config)
        elif args.command == "preset":
            cfg = preset(args.name)
            if args.seeds is not None:
                if args.seeds < 1:
                    print("--seeds must be >= 1", file=sys.stderr)
                    return 2
                cfg.seeds = cfg.seeds[: args.seeds]
        else:  # validate
            cfg = parse_config(args.config)
            n = len(expand_runs(cfg))
            print(f"config OK: {cfg.name} ({n} runs)")
            return 0
    except (ConfigParseError, ConfigValidationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return 2

    return _execute(cfg, args.out)


if __name__ == "__main__":
    sys.exit(main())
