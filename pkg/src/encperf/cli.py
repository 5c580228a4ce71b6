"""Command-line entry point: ``encperf {analyze,simulate,report,fixtures}``.

Exit status is 0 on success, 1 if any analysis or simulation row failed or
was infeasible, and 2 for configuration errors.
"""
from __future__ import annotations

import argparse
import json
import shutil
import sys
from pathlib import Path

from .analysis import DEFAULT_SOLVER, METHODS
from .benchmark import (
    DATA, BenchmarkConfig, ConfigError, MethodSpec, config_from_dict, load_config,
    run_benchmark, with_overrides,
)
from .fixtures import write_fixtures
from .io import SchemaError
from .simulator import VARIANTS, SimScenario, export_trajectories, simulate
from .ss_core import DimensionError

EXIT_OK, EXIT_FAILED, EXIT_CONFIG = 0, 1, 2


def _seeds(text: str) -> tuple:
    """``"0-9"`` or ``"1,4,7"``."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    if not out or min(out) < 0:
        raise argparse.ArgumentTypeError(f"invalid seed list {text!r}")
    return tuple(out)


def _names(choices):
    def parse(text):
        names = [n.strip() for n in text.split(",") if n.strip()]
        bad = [n for n in names if n not in choices]
        if bad:
            raise argparse.ArgumentTypeError(f"unknown name(s) {bad}; choose from {list(choices)}")
        return names
    return parse


def _system_args(p):
    p.add_argument("--plant", default=str(DATA / "batch_reactor_plant.json"),
                   help="plant JSON file (default: shipped batch reactor)")
    p.add_argument("--controller", default=str(DATA / "hinf_controller.json"),
                   help="controller JSON file (default: shipped H-infinity controller)")


def _base_config(args) -> BenchmarkConfig:
    doc = {"format": "encperf.benchmark/1", "plant": str(Path(args.plant).resolve()),
           "controller": str(Path(args.controller).resolve())}
    return config_from_dict(doc)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="encperf", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="certify l2-gains with LMIs")
    _system_args(a)
    a.add_argument("--methods", type=_names(METHODS), default=list(METHODS),
                   help="comma-separated subset of " + ",".join(METHODS))
    a.add_argument("--period", type=int, default=10)
    a.add_argument("--sector-gamma", type=float, default=0.223)
    a.add_argument("--horizon", type=int, default=None, help="FIR horizon (default: period)")
    a.add_argument("--solver", default=DEFAULT_SOLVER)
    a.add_argument("--csv", default=None, help="write the machine-readable table here")

    s = sub.add_parser("simulate", help="empirical l2-gain of one loop variant")
    _system_args(s)
    s.add_argument("--variant", choices=VARIANTS, default="nominal")
    s.add_argument("--steps", type=int, default=10_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--period", type=int, default=10)
    s.add_argument("--amplitude", type=float, default=1.0)
    s.add_argument("--error-policy", choices=("model", "adversarial", "none"), default="model")
    s.add_argument("--state-scale", type=float, default=16.0)
    s.add_argument("--reform-kind", choices=("controller_type", "observer_type"),
                   default="controller_type")
    s.add_argument("--export", default=None, help="write the trajectory CSV here")

    r = sub.add_parser("report", help="run a benchmark config and emit the comparison table")
    r.add_argument("--config", default=str(DATA / "benchmark_default.json"))
    r.add_argument("--methods", type=_names(METHODS), default=None)
    r.add_argument("--variants", type=_names(VARIANTS), default=None)
    r.add_argument("--period", type=int, default=None)
    r.add_argument("--sector-gamma", type=float, default=None)
    r.add_argument("--steps", type=int, default=None)
    r.add_argument("--seeds", type=_seeds, default=None, help='e.g. "0-9" or "0,3,5"')
    r.add_argument("--error-policy", choices=("model", "adversarial", "none"), default=None)
    r.add_argument("--solver", default=None)
    r.add_argument("--workers", type=int, default=None)
    r.add_argument("--text", default=None, help="write the aligned table here")
    r.add_argument("--csv", default=None, help="write the machine-readable table here")

    f = sub.add_parser("fixtures", help="write the shipped plant, controller and config files")
    f.add_argument("--out", default="fixtures")
    return parser


def _positive(name, value):
    if value is not None and value < 1:
        raise ConfigError(f"--{name} must be >= 1, got {value}")


def _cmd_analyze(args) -> int:
    _positive("period", args.period)
    _positive("horizon", args.horizon)
    cfg = _base_config(args)
    cfg.methods = [MethodSpec(m, args.period, args.sector_gamma, args.horizon) for m in args.methods]
    cfg.solver = args.solver
    cfg.csv_out = args.csv
    report = run_benchmark(cfg)
    sys.stdout.write(report.to_text())
    return EXIT_OK if report.ok else EXIT_FAILED


def _cmd_simulate(args) -> int:
    _positive("period", args.period)
    _positive("steps", args.steps)
    cfg = _base_config(args)
    sc = SimScenario(variant=args.variant, steps=args.steps, period=args.period, seed=args.seed,
                     amplitude=args.amplitude, error_policy=args.error_policy,
                     state_scale=args.state_scale, reform_kind=args.reform_kind,
                     store=args.export is not None)
    res = simulate(cfg.plant, cfg.controller, sc)
    if args.export:
        export_trajectories(res, args.export)
    gain = "-" if res.empirical_gain is None else f"{res.empirical_gain:.6g}"
    print(f"variant={res.variant} status={res.status} steps={res.steps} empirical_gain={gain}")
    for t, kind, info in res.events:
        if kind == "domain_error":
            print(f"t={t}: {info}")
    return EXIT_OK if res.status in ("ok", "no_input") else EXIT_FAILED


def _cmd_report(args) -> int:
    for name in ("period", "steps", "workers"):
        _positive(name, getattr(args, name))
    cfg = with_overrides(
        load_config(args.config), period=args.period, sector_gamma=args.sector_gamma,
        method_names=args.methods, steps=args.steps, seeds=args.seeds,
        variants=tuple(args.variants) if args.variants is not None else None,
        error_policy=args.error_policy, solver=args.solver, workers=args.workers,
        text_out=args.text, csv_out=args.csv)
    report = run_benchmark(cfg)
    sys.stdout.write(report.to_text())
    return EXIT_OK if report.ok else EXIT_FAILED


def _cmd_fixtures(args) -> int:
    out = Path(args.out)
    for path in write_fixtures(out):
        print(path)
    cfg = out / "benchmark_default.json"
    shutil.copyfile(DATA / "benchmark_default.json", cfg)
    print(cfg)
    return EXIT_OK


COMMANDS = {"analyze": _cmd_analyze, "simulate": _cmd_simulate,
            "report": _cmd_report, "fixtures": _cmd_fixtures}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, SchemaError, DimensionError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"encperf: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
