"""Command line entry point: ``run``, ``sweep``, ``feasibility``, ``dump-policy``.

Exit codes: 0 success, 1 validation error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from pathlib import Path

from .config import ConfigError, SimConfig, load_config, parse_overrides, config_from_mapping
from .experiments import SweepSpec, feasibility_report, run_sweep, sweep_csv
from .mdp import solve_for_node
from .policy import PolicyKind
from .sim import run_experiment, run_trials, trace_csv, trial_seeds


def _config(args) -> SimConfig:
    overrides = parse_overrides(args.set or [])
    if args.seed is not None:
        overrides["seed"] = str(args.seed)
    if args.config:
        return load_config(Path(args.config), overrides)
    return config_from_mapping(overrides)


def _policies(text: str) -> list[PolicyKind]:
    return [PolicyKind.parse(p) for p in text.split(",") if p.strip()]


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_run(args) -> None:
    cfg = _config(args)
    kinds = _policies(args.policy)
    result = run_experiment(cfg, kinds, args.trials, cfg.seed, args.workers)
    _emit(result.to_csv(), args.out)
    if args.trace:
        traces = run_trials(cfg, kinds, trial_seeds(cfg.seed, 1)[0], trace=True)
        path = Path(args.trace)
        for kind, metrics in traces.items():
            target = path if len(kinds) == 1 else path.with_name(
                f"{path.stem}.{kind.value}{path.suffix or '.csv'}")
            target.write_text(trace_csv(metrics))


def cmd_sweep(args) -> None:
    cfg = _config(args)
    if args.axis == "caching_case":
        values = [int(v) for v in args.values.split(",")]
    else:
        values = [float(v) for v in args.values.split(",")]
    spec = SweepSpec(args.axis, values, cfg, _policies(args.policy), args.trials,
                     None, cfg.seed)
    points = run_sweep(spec, args.workers)
    _emit(sweep_csv(spec, points), args.out)


def cmd_feasibility(args) -> None:
    cfg = _config(args)
    _emit(feasibility_report(cfg, args.psi0_db, args.delta_db), args.out)


def cmd_dump_policy(args) -> None:
    cfg = _config(args)
    if not 1 <= args.node_type <= cfg.L:
        raise ConfigError(f"node type must lie in 1..{cfg.L}")
    if args.distance <= 0:
        raise ConfigError("distance must be positive")
    table = solve_for_node(args.node_type, args.distance, cfg)
    bounds = table.space.class_bounds()
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("t", "z", "class", "b_lo_bits", "b_hi_bits", "M", "q", "G"))
    for t, z, n, M, q, g in table.rows():
        lo, hi = bounds[n]
        w.writerow((t, z, n, lo * cfg.b_unit, (hi + 1) * cfg.b_unit - 1, M, q or 0, f"{g:.10g}"))
    _emit(buf.getvalue(), args.out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cachestream", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, policies=True):
        p.add_argument("--config", help="INI config file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config key (repeatable)")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output path (default: stdout)")
        if policies:
            p.add_argument("--policy", default=",".join(k.value for k in PolicyKind))
            p.add_argument("--trials", type=int, default=1)
            p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("run", help="simulate one configuration")
    common(p)
    p.add_argument("--trace", help="per-slot CSV of the first trial")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="sweep one parameter")
    common(p)
    p.add_argument("--axis", required=True, choices=["lambda", "caching_case", "V", "upsilon_db"])
    p.add_argument("--values", required=True, help="comma separated")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("feasibility", help="admission feasibility report")
    common(p, policies=False)
    p.add_argument("--psi0-db", type=float, help="interfering node SNR (default: psi_db)")
    p.add_argument("--delta-db", type=float, help="existing user's INR margin")
    p.set_defaults(func=cmd_feasibility)

    p = sub.add_parser("dump-policy", help="dump one DP table as CSV")
    common(p, policies=False)
    p.add_argument("--node-type", type=int, required=True)
    p.add_argument("--distance", type=float, required=True)
    p.set_defaults(func=cmd_dump_policy)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
