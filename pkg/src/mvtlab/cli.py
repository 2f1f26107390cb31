"""Command-line entry point.

    mvtlab run <preset|config-file> [--seed N] [--reps N] [--traffic LIST]
               [--fixed-evaluator] [--out DIR]
    mvtlab validate-array <file>
    mvtlab list-presets
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .harness import PRESETS, parse_config, run_experiment
from .taguchi import ArrayFormatError, load_array, validate


def _parse_traffic(text: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in text.replace(",", " ").split())


def cmd_run(args) -> int:
    if args.target in PRESETS:
        config = PRESETS[args.target]
    else:
        path = Path(args.target)
        if not path.exists():
            print(f"error: {args.target!r} is neither a preset nor a config file", file=sys.stderr)
            return 2
        config = parse_config(path.read_text(), name=path.stem)
    overrides = {}
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.reps is not None:
        overrides["repetitions"] = args.reps
    if args.traffic is not None:
        overrides["traffic"] = _parse_traffic(args.traffic)
    if args.fixed_evaluator:
        overrides["fixed_evaluator"] = True
    if args.out is not None:
        overrides["out_dir"] = args.out
    config = replace(config, **overrides)
    outputs = run_experiment(config)
    for kind in ("csv", "svg", "manifest"):
        print(f"{kind}: {outputs[kind]}")
    return 0


def cmd_validate_array(args) -> int:
    try:
        text = Path(args.file).read_text()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        lines = [
            ln.split("#", 1)[0].strip() for ln in text.splitlines()
        ]
        lines = [ln for ln in lines if ln]
        levels = tuple(int(t) for t in lines[0].split())
        rows = tuple(tuple(int(t) for t in ln.split()) for ln in lines[1:])
        from .taguchi import OrthogonalArray

        report = validate(OrthogonalArray(column_levels=levels, rows=rows))
    except (ArrayFormatError, ValueError, IndexError) as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    for check in report.checks:
        status = "pass" if check.passed else "FAIL"
        extra = f" (columns {list(check.offending_columns)})" if not check.passed else ""
        print(f"{check.name}: {status}{extra}")
    unbalanced_pairs = [pair for pair, ok in report.pair_balance_info if not ok]
    if unbalanced_pairs:
        print(f"info: pair balance does not hold for column pairs {unbalanced_pairs}")
    else:
        print("info: all column pairs are pair-balanced")
    return 0 if report.valid else 1


def cmd_list_presets(_args) -> int:
    for name, cfg in PRESETS.items():
        print(
            f"{name}: space {list(cfg.space.cardinalities)}, mode {cfg.mode}, "
            f"array {cfg.array_name}, curve {cfg.curve}"
        )
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="mvtlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a preset or config-file experiment")
    run_p.add_argument("target", help="preset name or path to a config file")
    run_p.add_argument("--seed", type=int, default=None)
    run_p.add_argument("--reps", type=int, default=None)
    run_p.add_argument("--traffic", type=str, default=None, help="comma-separated totals")
    run_p.add_argument("--fixed-evaluator", action="store_true")
    run_p.add_argument("--out", type=str, default=None)
    run_p.set_defaults(func=cmd_run)

    val_p = sub.add_parser("validate-array", help="validate an orthogonal array file")
    val_p.add_argument("file")
    val_p.set_defaults(func=cmd_validate_array)

    list_p = sub.add_parser("list-presets", help="list bundled experiment presets")
    list_p.set_defaults(func=cmd_list_presets)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
