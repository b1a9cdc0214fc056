"""Command line entry point.

Verbs:
  run            execute the experiment described by a config file
  sweep          axis sweep; --axis/--values override the config
  analyze        recompute analysis artifacts from saved checkpoints
  show-defaults  print a complete config with every default
  validate       check a config file and report problems

Exit codes: 0 success, 1 runtime failure, 2 invalid configuration.
TNVD_OUTPUT_ROOT sets the root for auto-named run directories.
"""

from __future__ import annotations

import argparse
import sys

from .config import (SWEEP_AXES, ConfigError, config_from_dict,
                     config_to_dict, default_config_yaml, load_config)
from .runner import analyze_run_dir, run_experiment, run_sweep


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="tnvd",
        description="variational diagonalization experiments for 1D spin chains")
    sub = p.add_subparsers(dest="verb", required=True)

    run_p = sub.add_parser("run", help="execute a config")
    run_p.add_argument("config", help="YAML config path")
    run_p.add_argument("--output-dir", default=None,
                       help="run directory (default: auto under output root)")
    run_p.add_argument("--workers", type=int, default=None,
                       help="worker pool size for sub-runs")

    sweep_p = sub.add_parser("sweep", help="run an axis sweep")
    sweep_p.add_argument("config", help="YAML config path")
    sweep_p.add_argument("--axis", choices=SWEEP_AXES, default=None)
    sweep_p.add_argument("--values", default=None,
                         help="comma-separated axis values, e.g. 2,4,8,16")
    sweep_p.add_argument("--output-dir", default=None)
    sweep_p.add_argument("--workers", type=int, default=None)

    an_p = sub.add_parser("analyze",
                          help="recompute analysis on an existing run directory")
    an_p.add_argument("run_dir")

    sub.add_parser("show-defaults", help="print the default config")

    val_p = sub.add_parser("validate", help="validate a config file")
    val_p.add_argument("config", help="YAML config path")
    return p


def _load(path, workers=None):
    cfg = load_config(path)
    if workers is not None:
        tree = config_to_dict(cfg)
        tree["output"]["workers"] = workers
        cfg = config_from_dict(tree)
    return cfg


def _sweep_config(path, axis, values_text, workers):
    tree = config_to_dict(load_config(path))
    tree["experiment"]["kind"] = "sweep"
    if axis is not None:
        tree["experiment"]["sweep_axis"] = axis
    if values_text is not None:
        values = []
        for piece in values_text.split(","):
            piece = piece.strip()
            if not piece:
                continue
            try:
                values.append(float(piece))
            except ValueError:
                raise ConfigError([f"--values: bad number {piece!r}"]) from None
        tree["experiment"]["sweep_values"] = values
    if workers is not None:
        tree["output"]["workers"] = workers
    return config_from_dict(tree)


def _print_outcome(summary: dict, run_dir: str) -> None:
    print(f"run directory: {run_dir}")
    print(f"status: {summary['status']}")
    train = summary.get("train")
    if train:
        print(f"best F: {train['best_F']}")
    analysis = summary.get("analysis")
    if analysis and analysis.get("epsilon") is not None:
        print(f"epsilon: {analysis['epsilon']}")
    if "n_ok" in summary:
        print(f"sub-runs ok: {summary['n_ok']}, failed: {summary['n_failed']}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.verb == "show-defaults":
            sys.stdout.write(default_config_yaml())
            return 0
        if args.verb == "validate":
            load_config(args.config)
            print("config OK")
            return 0
        if args.verb == "run":
            cfg = _load(args.config, workers=args.workers)
            summary, run_dir = run_experiment(cfg, run_dir=args.output_dir)
            _print_outcome(summary, run_dir)
            return 0 if summary["status"] == "ok" else 1
        if args.verb == "sweep":
            cfg = _sweep_config(args.config, args.axis, args.values,
                                args.workers)
            summary, run_dir = run_sweep(cfg, run_dir=args.output_dir)
            _print_outcome(summary, run_dir)
            return 0 if summary["status"] == "ok" else 1
        if args.verb == "analyze":
            analyze_run_dir(args.run_dir)
            print(f"analysis updated in {args.run_dir}")
            return 0
        raise AssertionError(f"unhandled verb {args.verb}")
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
