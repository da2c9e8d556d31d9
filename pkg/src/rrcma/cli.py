"""Command-line entry point: ``rrcma <command> [options]``.

Exit status is 0 on success, 2 for invalid configuration and 3 for runtime
failures (numerical, I/O or incomplete logs).
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from . import verify
from .benchmarks import FIXED_DIMENSION, PROBLEMS, make_problem
from .errors import ConfigError, RRCMAError
from .harness import (
    RRF_COLUMNS,
    SUMMARY_COLUMNS,
    ExperimentConfig,
    aggregate_rrf,
    ecdf_from_logs,
    read_config_file,
    run_experiment,
    write_ecdf,
    write_table,
)

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3

# option name -> (type, ExperimentConfig field)
RUN_OPTIONS = {
    "problem": (str, "problems"),
    "dim": (int, "dims"),
    "instances": (int, "instances"),
    "strategy": (str, "strategy"),
    "repelling": (str, "repelling"),
    "coverage-c": (float, "c"),
    "gamma": (float, "gamma"),
    "sigma0": (float, "sigma0"),
    "budget": (int, "budget"),
    "runs": (int, "runs"),
    "seed": (int, "base_seed"),
    "out": (str, "out"),
    "workers": (int, "workers"),
    "resume": (str, "resume"),
}
LIST_FIELDS = {"problems", "dims", "instances"}


def _parse_bool(text: str, key: str) -> bool:
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected on/off, got {text!r}", key)


def _parse_budget(text: str) -> int:
    # accepts scientific notation such as 1e4
    value = float(text)
    if value != int(value):
        raise ConfigError(f"budget must be an integer, got {text!r}", "budget")
    return int(value)


def _convert(key: str, raw) -> object:
    typ, name = RUN_OPTIONS[key]
    try:
        if name in LIST_FIELDS:
            parts = raw if isinstance(raw, list) else str(raw).replace(",", " ").split()
            return [typ(p) for p in parts]
        if name in ("repelling", "resume"):
            return _parse_bool(raw, key)
        if name == "budget":
            return _parse_budget(raw)
        return typ(raw)
    except ValueError as exc:
        raise ConfigError(f"invalid value {raw!r}: {exc}", key) from exc


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    """Defaults, then the config file, then explicit command-line flags."""
    values = {}
    if args.config:
        for key, raw in read_config_file(args.config).items():
            if key not in RUN_OPTIONS:
                raise ConfigError(f"unknown key {key!r} in config file", "config")
            values[RUN_OPTIONS[key][1]] = _convert(key, raw)
    for key in RUN_OPTIONS:
        raw = getattr(args, key.replace("-", "_"))
        if raw is not None:
            values[RUN_OPTIONS[key][1]] = _convert(key, raw)
    return ExperimentConfig(**values).validate()


def cmd_run(args) -> int:
    cfg = build_config(args)
    ids = run_experiment(cfg)
    print(f"wrote {len(ids)} run logs to {Path(cfg.out) / 'runs'}")
    return EXIT_OK


def cmd_rrf(args) -> int:
    rows, summary = aggregate_rrf(args.logs)
    out = Path(args.out or args.logs)
    out.mkdir(parents=True, exist_ok=True)
    write_table(rows, RRF_COLUMNS, out / "rrf_runs.csv")
    write_table(summary, SUMMARY_COLUMNS, out / "rrf_summary.csv")
    for row in summary:
        print(f"{row['function']} d={row['dimension']} i={row['instance']} {row['strategy']}: "
              f"mean={row['mean']:.4f} median={row['median']:.4f} "
              f"IQR=[{row['q1']:.4f}, {row['q3']:.4f}] n={row['n_runs']}")
    return EXIT_OK


def cmd_ecdf(args) -> int:
    curves = ecdf_from_logs(args.logs)
    out = Path(args.out or args.logs)
    out.mkdir(parents=True, exist_ok=True)
    write_ecdf(curves, out / "ecdf.csv")
    for (name, d, label), curve in curves.items():
        print(f"{name} d={d} {label}: final fraction {curve.fraction[-1]:.4f}")
    return EXIT_OK


def cmd_list_problems(args) -> int:
    for name, (description, _) in PROBLEMS.items():
        fixed = FIXED_DIMENSION.get(name)
        dims = f"d={fixed}" if fixed else "any d"
        print(f"{name:16s} {dims:6s} {description}")
    return EXIT_OK


def cmd_optima(args) -> int:
    problem = make_problem(args.problem, args.dim, args.instance)
    rows = [["kind", "f"] + [f"x{i + 1}" for i in range(problem.d)]]
    rows.append(["global", repr(problem.f_star)] + [repr(float(v)) for v in problem.x_star])
    for x, fx in problem.local_optima:
        rows.append(["local", repr(float(fx))] + [repr(float(v)) for v in np.asarray(x)])
    if args.out is None:
        csv.writer(sys.stdout, lineterminator="\n").writerows(rows)
    else:
        with open(args.out, "w", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerows(rows)
    return EXIT_OK


def cmd_verify(args) -> int:
    results = verify.run_checks(seed=args.seed)
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_RUNTIME


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rrcma", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute an experiment and write run logs")
    run.add_argument("--config", help="file with key = value lines; flags take precedence")
    run.add_argument("--problem", nargs="+")
    run.add_argument("--dim", nargs="+")
    run.add_argument("--instances", nargs="+")
    run.add_argument("--strategy", choices=["restart", "ipop", "bipop"])
    run.add_argument("--repelling", choices=["on", "off"])
    run.add_argument("--coverage-c")
    run.add_argument("--gamma")
    run.add_argument("--sigma0")
    run.add_argument("--budget", help="evaluations per run (default 1e4 * d)")
    run.add_argument("--runs")
    run.add_argument("--seed")
    run.add_argument("--out")
    run.add_argument("--workers")
    run.add_argument("--resume", action="store_const", const="on",
                     help="skip runs whose log is already complete")
    run.set_defaults(func=cmd_run)

    rrf = sub.add_parser("rrf", help="classify restarts and report the redundancy factor")
    rrf.add_argument("logs", help="experiment directory or run-log directory")
    rrf.add_argument("--out")
    rrf.set_defaults(func=cmd_rrf)

    ecdf = sub.add_parser("ecdf", help="tabulate runtime distributions over target levels")
    ecdf.add_argument("logs")
    ecdf.add_argument("--out")
    ecdf.set_defaults(func=cmd_ecdf)

    lp = sub.add_parser("list-problems", help="list benchmark problems")
    lp.set_defaults(func=cmd_list_problems)

    opt = sub.add_parser("optima", help="export the known optima of a problem instance as CSV")
    opt.add_argument("problem")
    opt.add_argument("--dim", type=int, default=2)
    opt.add_argument("--instance", type=int, default=0)
    opt.add_argument("--out")
    opt.set_defaults(func=cmd_optima)

    ver = sub.add_parser("verify", help="check library invariants on fixtures")
    ver.add_argument("--seed", type=int, default=0)
    ver.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RRCMAError, OSError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
