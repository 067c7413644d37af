"""Command-line front end.

Verbs: ``run``, ``sweep``, ``verify``, ``scenarios``. Exit codes: 0 success,
2 configuration error, 3 runtime failure, 4 verification failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .checks import CHECKS
from .errors import ConfigError, ParameterError
from .forager import Budget
from .metrics import write_metrics
from .scenarios import BUILTINS, ScenarioSpec, builtin, load_spec_file
from .simulation import simulate
from .sweep import SweepPlan, format_table, run_sweep, table_rows, write_table
from .trace import write_trace
from .walkers import WALKER_KINDS

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_VERIFY = 4

TRACE_FILE = "trace.csv"
METRICS_FILE = "metrics.json"
SWEEP_FILE = "sweep.csv"


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _walkers(text: str) -> list[str]:
    kinds = [x.strip() for x in text.split(",") if x.strip()]
    for k in kinds:
        if k not in WALKER_KINDS:
            raise argparse.ArgumentTypeError(f"unknown walker {k!r}; choose from {WALKER_KINDS}")
    return kinds


def _add_scenario_args(p: argparse.ArgumentParser, grid: bool) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--scenario", help=f"built-in scenario: {', '.join(BUILTINS)}")
    src.add_argument("--config", type=Path, help="YAML scenario file")
    p.add_argument("--out", type=Path, default=Path("."), help="output directory (default: .)")
    p.add_argument("--mode", choices=("df", "ndf"), help="override the foraging mode")
    p.add_argument("--budget", type=float, help="override with a distance budget")
    if grid:
        p.add_argument("--mu", type=_floats, help="comma-separated exponents")
        p.add_argument("--rd", type=_floats, help="comma-separated detection radii")
        p.add_argument("--drift", type=_floats,
                       help="comma-separated drift magnitudes along the scenario's drift axis")
        p.add_argument("--walker", type=_walkers, help="comma-separated walker kinds")
    else:
        p.add_argument("--mu", type=float, help="override the jump exponent")
        p.add_argument("--rd", type=float, help="override the detection radius")
        p.add_argument("--drift", type=_floats, help="drift vector, comma-separated")
        p.add_argument("--walker", choices=WALKER_KINDS, help="override the walker")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="levyforage",
                                     description="Seeded Lévy-flight search simulator.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("run", help="simulate one seeded run; writes trace.csv and metrics.json")
    _add_scenario_args(p, grid=False)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("sweep", help="Monte Carlo sweep over a parameter grid; writes sweep.csv")
    _add_scenario_args(p, grid=True)
    p.add_argument("--seed", type=int, default=0, help="base seed")
    p.add_argument("--replicates", type=int, default=10)
    p.add_argument("--jobs", type=int, default=1, help="worker processes")

    p = sub.add_parser("verify", help="run a statistical law check")
    p.add_argument("check", choices=sorted(CHECKS))
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--replicates", type=int, help="override the check's replicate count")
    p.add_argument("--jobs", type=int, default=1, help="worker processes (efficiency only)")

    sub.add_parser("scenarios", help="list the built-in scenarios")
    return parser


def load_scenario(args) -> ScenarioSpec:
    if args.config is not None:
        spec = load_spec_file(args.config)
    else:
        try:
            spec = builtin(args.scenario)
        except KeyError as exc:
            raise ConfigError(exc.args[0]) from None
    budget = Budget(distance=args.budget) if args.budget is not None else None
    return spec.with_overrides(mode=args.mode, budget=budget)


def cmd_run(args) -> int:
    spec = load_scenario(args)
    drift = tuple(args.drift) if args.drift is not None else None
    if drift is not None and len(drift) != spec.dimension:
        raise ConfigError(f"--drift needs {spec.dimension} components, got {len(drift)}")
    spec = spec.with_overrides(mu=args.mu, r_d=args.rd, drift=drift, walker=args.walker)
    res = simulate(spec, args.seed)
    m = res.metrics()
    args.out.mkdir(parents=True, exist_ok=True)
    write_trace(res.trace, args.out / TRACE_FILE)
    write_metrics(m, args.out / METRICS_FILE,
                  extra={"scenario": spec.name, "seed": args.seed, "version": __version__})
    print(f"scenario {spec.name} seed {args.seed}")
    for k, t in m.first_arrival:
        print(f"  cluster {k}: t_a = {t:.6g}")
    if m.no_arrival:
        print("  no arrival: budget exhausted before any reward was collected")
    print(f"  collections {m.sites_visited} of {spec.total_rewards}")
    print(f"  total distance {m.total_distance:.6g}")
    print(f"  flights {m.flight_count}, eta {m.eta:.6g}, N_d {m.n_d:.6g}")
    print(f"  wrote {args.out / TRACE_FILE} and {args.out / METRICS_FILE}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec = load_scenario(args)
    plan = SweepPlan(spec, mus=args.mu, r_ds=args.rd, drifts=args.drift, walkers=args.walker,
                     replicates=args.replicates, base_seed=args.seed, jobs=args.jobs)
    results = run_sweep(plan)
    rows = table_rows(plan, results)
    args.out.mkdir(parents=True, exist_ok=True)
    write_table(rows, args.out / SWEEP_FILE)
    print(format_table(rows))
    print(f"wrote {args.out / SWEEP_FILE}")
    failed = [r for r in results if r.failed]
    for r in failed:
        print(f"cell {r.cell} failed: {r.errors[0]}", file=sys.stderr)
    return EXIT_RUNTIME if failed else EXIT_OK


def cmd_verify(args) -> int:
    kwargs = {"seed": args.seed}
    if args.replicates is not None:
        key = {"drift": "pairs", "invariants": "runs", "tail": "n"}.get(args.check, "replicates")
        kwargs[key] = args.replicates
    if args.check == "efficiency":
        kwargs["jobs"] = args.jobs
    res = CHECKS[args.check](**kwargs)
    print(res.report())
    return EXIT_OK if res.passed else EXIT_VERIFY


def cmd_scenarios(args) -> int:
    for name in BUILTINS:
        s = builtin(name)
        counts = "/".join(str(c.count) for c in s.clusters)
        print(f"{name:9} {s.dimension}D  r_d={s.r_d:g}  clusters={len(s.clusters)} ({counts})  "
              f"start={list(s.start)}")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "verify": cmd_verify, "scenarios": cmd_scenarios}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.verb](args)
    except (ConfigError, ParameterError) as exc:
        print(f"levyforage: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:
        print(f"levyforage: run failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
