"""Seeded Monte Carlo sweeps over a parameter grid.

Every replicate gets its own seed ``mix_seed(base_seed, cell, replicate)``
and its own generators, so replicates can run in any order on any number of
worker processes. Results are gathered back into grid order before any
statistic is computed, which makes the table independent of ``jobs``.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError
from .rng import mix_seed
from .scenarios import ScenarioSpec
from .simulation import simulate

MAX_JOBS_ENV = "LEVYFORAGE_MAX_JOBS"
STATS = ("mean", "median", "p10", "p90")
QUANTITIES = ("t_a", "eta", "n_d")


@dataclass(frozen=True)
class SweepPlan:
    """Grid of overrides applied to ``scenario``; ``None`` lists keep the scenario's value.

    ``drifts`` are magnitudes along the scenario's own drift direction, or
    along the first axis when the scenario has no drift.
    """

    scenario: ScenarioSpec
    mus: Optional[Sequence[float]] = None
    r_ds: Optional[Sequence[float]] = None
    drifts: Optional[Sequence[float]] = None
    walkers: Optional[Sequence[str]] = None
    replicates: int = 1
    base_seed: int = 0
    jobs: int = 1

    def __post_init__(self):
        if int(self.replicates) != self.replicates or self.replicates < 1:
            raise ConfigError(f"replicates must be a positive integer, got {self.replicates}")
        if self.jobs < 1:
            raise ConfigError(f"jobs must be >= 1, got {self.jobs}")
        for name in ("mus", "r_ds", "drifts", "walkers"):
            v = getattr(self, name)
            if v is not None and len(v) == 0:
                raise ConfigError(f"{name}: grid axis must not be empty")
        for spec in self.cell_specs():
            spec.validate()

    def axes(self) -> list[tuple]:
        s = self.scenario
        own_drift = math.hypot(*s.drift)
        return [
            tuple(self.mus) if self.mus is not None else (s.law.mu,),
            tuple(self.r_ds) if self.r_ds is not None else (s.r_d,),
            tuple(self.drifts) if self.drifts is not None else (own_drift,),
            tuple(self.walkers) if self.walkers is not None else (s.walker,),
        ]

    def cells(self) -> list[tuple]:
        """``(mu, r_d, drift, walker)`` per cell, in table order."""
        return list(itertools.product(*self.axes()))

    def cell_specs(self) -> list[ScenarioSpec]:
        return [self._cell_spec(c) for c in self.cells()]

    def _cell_spec(self, cell) -> ScenarioSpec:
        mu, r_d, drift, walker = cell
        s = self.scenario
        norm = math.hypot(*s.drift)
        axis = tuple(v / norm for v in s.drift) if norm > 0 else (1.0,) + (0.0,) * (s.dimension - 1)
        try:
            return s.with_overrides(mu=mu, r_d=r_d, drift=tuple(drift * a for a in axis),
                                    walker=walker)
        except ConfigError as exc:
            raise ConfigError(f"cell {cell}: {exc}") from None

    def seed(self, cell: int, replicate: int) -> int:
        return mix_seed(self.base_seed, cell, replicate)


@dataclass
class CellResult:
    cell: tuple
    t_a: list = field(default_factory=list)
    eta: list = field(default_factory=list)
    n_d: list = field(default_factory=list)
    no_arrival: int = 0
    errors: list = field(default_factory=list)

    @property
    def failed(self) -> bool:
        return bool(self.errors)


def effective_jobs(requested: int) -> int:
    """``requested`` capped by the environment variable, if set."""
    cap = os.environ.get(MAX_JOBS_ENV)
    if cap:
        try:
            return max(1, min(requested, int(cap)))
        except ValueError:
            raise ConfigError(f"{MAX_JOBS_ENV} must be an integer, got {cap!r}") from None
    return requested


def run_replicate(task) -> tuple:
    """Worker entry point: ``(t_a or None, eta, n_d)`` or ``("error", message)``."""
    spec, seed = task
    try:
        res = simulate(spec, seed)
        m = res.metrics_summary()
        return (m.t_a, m.eta, m.n_d)
    except Exception as exc:  # a failed replicate marks its cell, the sweep goes on
        return ("error", f"seed {seed}: {type(exc).__name__}: {exc}")


def run_sweep(plan: SweepPlan) -> list[CellResult]:
    specs = plan.cell_specs()
    tasks = [(spec, plan.seed(c, r)) for c, spec in enumerate(specs)
             for r in range(plan.replicates)]
    jobs = effective_jobs(plan.jobs)
    if jobs == 1:
        outcomes = [run_replicate(t) for t in tasks]
    else:
        chunk = max(1, len(tasks) // (jobs * 8))
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(run_replicate, tasks, chunksize=chunk))
    results = [CellResult(cell) for cell in plan.cells()]
    for i, out in enumerate(outcomes):
        res = results[i // plan.replicates]
        if out[0] == "error":
            res.errors.append(out[1])
            continue
        t_a, eta, n_d = out
        if t_a is None:
            res.no_arrival += 1
        else:
            res.t_a.append(t_a)
        res.eta.append(eta)
        res.n_d.append(n_d)
    return results


def summarize(values: Sequence[float]) -> dict:
    """mean / median / p10 / p90 over the finite values; NaN when there are none."""
    a = np.asarray([v for v in values if v is not None and math.isfinite(v)], dtype=float)
    if a.size == 0:
        return dict.fromkeys(STATS, math.nan)
    p10, med, p90 = np.percentile(a, [10, 50, 90])
    return {"mean": float(a.mean()), "median": float(med), "p10": float(p10), "p90": float(p90)}


COLUMNS = (["cell", "mu", "r_d", "drift", "walker", "replicates", "failed", "no_arrival"]
           + [f"{q}_{s}" for q in QUANTITIES for s in STATS])


def table_rows(plan: SweepPlan, results: Sequence[CellResult]) -> list[dict]:
    rows = []
    for k, res in enumerate(results):
        mu, r_d, drift, walker = res.cell
        row = {"cell": k, "mu": float(mu), "r_d": float(r_d), "drift": float(drift),
               "walker": walker, "replicates": plan.replicates, "failed": int(res.failed),
               "no_arrival": res.no_arrival}
        for q in QUANTITIES:
            for s, v in summarize(getattr(res, q)).items():
                row[f"{q}_{s}"] = v
        rows.append(row)
    return rows


def _fmt(v) -> str:
    return repr(v) if isinstance(v, float) else str(v)


def dumps_table(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for row in rows:
        w.writerow([_fmt(row[c]) for c in COLUMNS])
    return buf.getvalue()


def loads_table(text: str) -> list[dict]:
    rows = []
    for raw in csv.DictReader(io.StringIO(text)):
        row: dict = {}
        for k, v in raw.items():
            if k == "walker":
                row[k] = v
            elif k in ("cell", "replicates", "failed", "no_arrival"):
                row[k] = int(v)
            else:
                row[k] = float(v)
        rows.append(row)
    return rows


def write_table(rows: Sequence[dict], path) -> None:
    Path(path).write_text(dumps_table(rows))


def format_table(rows: Sequence[dict]) -> str:
    """Human-readable summary: mean and p10-p90 band per quantity."""
    head = f"{'cell':>4} {'mu':>5} {'r_d':>7} {'drift':>6} {'walker':>14} {'fail':>4} {'noarr':>5}"
    for q in QUANTITIES:
        head += f" {q + ' mean':>12} {'[p10, p90]':>23}"
    lines = [head]
    for r in rows:
        line = (f"{r['cell']:>4} {r['mu']:>5.2f} {r['r_d']:>7.3g} {r['drift']:>6.2f} "
                f"{r['walker']:>14} {r['failed']:>4} {r['no_arrival']:>5}")
        for q in QUANTITIES:
            line += (f" {r[q + '_mean']:>12.5g} [{r[q + '_p10']:>10.4g}, {r[q + '_p90']:>10.4g}]")
        lines.append(line)
    return "\n".join(lines)
