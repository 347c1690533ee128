"""Command-line entry point: ``coarsectrl {run,sweep,example1,check}``.

Exit status is 0 on success, 1 on configuration errors (including bad
arguments) and 2 on numerical failures.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

from . import __version__
from .errors import ConfigError, NumericalError

log = logging.getLogger("coarsectrl")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _add_experiment_flags(p):
    p.add_argument("--config", default="defaults", help="YAML config path, or 'defaults'")
    p.add_argument("--seed", type=int, action="append",
                   help="trial seed (repeatable); replaces the configured seed list")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config entry, value parsed as YAML; dotted keys reach nested entries")
    p.add_argument("--out", help="output directory (default: output_dir from the config)")
    p.add_argument("--prune-quantile", type=float, help="row-norm quantile above which rows are pruned")
    p.add_argument("--perfect-sync", action="store_true", help="coarse nodes each cover a single community")
    p.add_argument("--dump-estimates", action="store_true", help="write phi_hat.csv and p_hat.csv")
    p.add_argument("--workers", type=int, help="worker processes (default: COARSECTRL_THREADS or CPU count)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="coarsectrl", description="Group controllability from coarse SBM measurements.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    _add_experiment_flags(sub.add_parser("run", help="run trials at a single parameter point"))
    _add_experiment_flags(sub.add_parser("sweep", help="sweep m, rho_n or omega over seeds"))
    sub.add_parser("example1", help="print the worked 8-node example in exact fractions")
    sub.add_parser("check", help="run the oracle identity suite")
    return parser


def _resolve_config(args, sweep: bool):
    from .experiment import load_config, parse_override

    overrides = dict(parse_override(item) for item in args.overrides)
    if args.seed:
        overrides["seeds"] = list(args.seed)
    if args.prune_quantile is not None:
        overrides["prune_quantile"] = args.prune_quantile
    if args.perfect_sync:
        overrides["perfect_sync"] = True
    cfg = load_config(args.config, overrides)
    if sweep and cfg.sweep_var is None:
        raise ConfigError("sweep needs a sweep variable (config 'sweep:' or --set sweep.variable=...)")
    if not sweep and cfg.sweep_var is not None:
        cfg = dataclasses.replace(cfg, sweep_var=None, sweep_values=())
    return cfg


def _experiment(args, sweep: bool) -> int:
    from .experiment import METRICS, run_sweep

    cfg = _resolve_config(args, sweep)
    out = Path(args.out or cfg.output_dir)
    result = run_sweep(cfg, out_dir=out, workers=args.workers, dump_estimates=args.dump_estimates)
    for row in result.aggregate:
        label = f"{row['sweep_var']}={row['sweep_value']}" if sweep else "trials"
        stats = "  ".join(f"{k}={row[k + '_mean']:.4f}" for k in METRICS[:3])
        print(f"{label}  n={row['n_trials']}  {stats}")
    print(f"wrote {out}/trials.csv, aggregate.csv, manifest.json")
    if result.n_failed:
        failed = [r for r in result.records if not r.ok]
        print(f"{len(failed)} of {len(result.records)} trials failed:", file=sys.stderr)
        for r in failed:
            print(f"  seed={r.seed} value={r.sweep_value} status={r.status}", file=sys.stderr)
        if len(failed) == len(result.records):
            return EXIT_NUMERICAL
    return EXIT_OK


def _example1(_args) -> int:
    from .example1 import report

    print(report())
    return EXIT_OK


def _check(_args) -> int:
    from .checks import run_all

    results = run_all()
    for res in results:
        print(res.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_NUMERICAL


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            return _experiment(args, sweep=False)
        if args.command == "sweep":
            return _experiment(args, sweep=True)
        if args.command == "example1":
            return _example1(args)
        return _check(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
