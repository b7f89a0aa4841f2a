"""Command-line entry point.

    hybridrc run --config cfg.json [--seed S] [--out DIR] [--threads K]
                 [--realizations R] [--emit-inputs] [--json] [--no-plot]
    hybridrc sweep --preset fig4 | --grid "M=1000,inf;tau=0,1,2"
                 [--config base.json] [--seed S] [--out DIR] ...

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys

from .config import ExperimentConfig, load_config
from .errors import ConfigError, NumericalFailure
from .runner import (emit_input_series, record_rows, run_experiment,
                     summary_row, write_results_csv, write_results_json,
                     write_summary_csv)
from .sweeps import PRESETS, parse_grid, preset_cells, run_sweep

__all__ = ["main"]


def _add_common(parser):
    parser.add_argument("--config", help="flat JSON config file")
    parser.add_argument("--seed", type=int, help="override the master seed")
    parser.add_argument("--out", default="hybridrc_out", help="output directory")
    parser.add_argument("--threads", type=int, default=1,
                        help="parallel realizations")
    parser.add_argument("--realizations", type=int,
                        help="override the realization count")
    parser.add_argument("--emit-inputs", action="store_true",
                        help="dump per-realization input sequences for replay")
    parser.add_argument("--json", action="store_true",
                        help="also write a JSON mirror of the results")
    parser.add_argument("--no-plot", action="store_true",
                        help="skip figure rendering")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hybridrc")
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="run one experiment config")
    _add_common(run_p)
    sweep_p = sub.add_parser("sweep", help="run a figure preset or custom grid")
    group = sweep_p.add_mutually_exclusive_group(required=True)
    group.add_argument("--preset", choices=sorted(PRESETS),
                       help="figure-reproduction preset")
    group.add_argument("--grid", help='custom grid, e.g. "M=1000,inf;tau=0,1,2"')
    _add_common(sweep_p)
    return parser


def _base_config(args) -> ExperimentConfig:
    config = load_config(args.config) if args.config else ExperimentConfig()
    overrides = {}
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.realizations is not None:
        overrides["realizations"] = args.realizations
    return config.with_overrides(**overrides) if overrides else config


def _cmd_run(args) -> int:
    config = _base_config(args)
    os.makedirs(args.out, exist_ok=True)
    records, summary = run_experiment(config, threads=args.threads)
    rows = record_rows(config, records)
    write_results_csv(os.path.join(args.out, "results.csv"), rows)
    write_summary_csv(os.path.join(args.out, "summary.csv"),
                      [summary_row(config, records, summary)])
    if args.json:
        write_results_json(os.path.join(args.out, "results.json"), rows)
    if args.emit_inputs:
        emit_input_series(config, os.path.join(args.out, "inputs"))
    if not args.no_plot:
        from .plotting import render_run
        render_run(rows, os.path.join(args.out, "run.png"))
    print(f"{config.task} tau={config.tau} {config.baseline}: "
          f"{records[0].metric} = {summary.mean:.6g} +- {summary.stderr:.2g} "
          f"(n={summary.n})")
    print(f"wrote {args.out}/results.csv")
    return 0


def _cmd_sweep(args) -> int:
    base = _base_config(args)
    if args.preset:
        preset_base, cells = preset_cells(args.preset)
        base = base.with_overrides(**preset_base)
        name = args.preset
    else:
        cells = parse_grid(args.grid)
        name = "grid"
    os.makedirs(args.out, exist_ok=True)
    result_rows, summary_rows = run_sweep(base, cells, threads=args.threads)
    write_results_csv(os.path.join(args.out, "results.csv"), result_rows)
    write_summary_csv(os.path.join(args.out, "summary.csv"), summary_rows)
    if args.json:
        write_results_json(os.path.join(args.out, "results.json"), result_rows)
    if args.emit_inputs:
        emit_input_series(base, os.path.join(args.out, "inputs"))
    if not args.no_plot:
        from .plotting import render_sweep
        figure = os.path.join(args.out, f"{name.replace('-', '_')}.png")
        render_sweep(name, summary_rows, figure)
        print(f"rendered {figure}")
    print(f"{len(cells)} cells x {base.realizations} realizations -> "
          f"{args.out}/summary.csv")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_sweep(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
