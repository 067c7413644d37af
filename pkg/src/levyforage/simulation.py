"""One seeded run of a scenario."""

from __future__ import annotations

from dataclasses import dataclass

from .forager import Forager, ForagerState
from .metrics import RunMetrics, compute_metrics
from .rng import SeededRng, stream_seed
from .scenarios import ScenarioSpec
from .trace import Trace
from .world import RewardField, generate_rewards

AGENT_STREAM = 0
WORLD_STREAM = 1


@dataclass
class RunResult:
    spec: ScenarioSpec
    seed: int
    trace: Trace
    field: RewardField
    state: ForagerState

    def metrics(self) -> RunMetrics:
        return compute_metrics(self.trace, self.spec.configured_lambda())

    def metrics_summary(self) -> RunMetrics:
        """Metrics without the per-event curves; what sweeps aggregate."""
        return compute_metrics(self.trace, self.spec.configured_lambda(), curves=False)


def build_field(spec: ScenarioSpec, seed: int) -> RewardField:
    """Reward field for ``spec``; uses ``spec.world_seed`` when set so worlds can be held fixed."""
    ws = spec.world_seed if spec.world_seed is not None else stream_seed(seed, WORLD_STREAM)
    return generate_rewards(spec.domain, spec.clusters, SeededRng(ws), spec.r_d, spec.mode)


def simulate(spec: ScenarioSpec, seed: int) -> RunResult:
    field = build_field(spec, seed)
    law = spec.jump_law()
    meta = {"scenario": spec.name, "seed": seed, "mode": spec.mode, "r_d": repr(float(spec.r_d)),
            "walker": spec.walker, "mu": repr(law.mu), "ell_min": repr(law.ell_min),
            "ell_max": repr(law.ell_max), "boundary": spec.boundary}
    forager = Forager(field, spec.make_walker(), SeededRng(stream_seed(seed, AGENT_STREAM)),
                      spec.start, drift=spec.drift_vector, boundary=spec.boundary,
                      budget=spec.effective_budget(), trace_meta=meta,
                      cluster_sizes=tuple(c.count for c in spec.clusters))
    trace = forager.run()
    return RunResult(spec, seed, trace, field, forager.state)


def run(spec: ScenarioSpec, seed: int) -> tuple[Trace, RunMetrics]:
    """Simulate until termination; returns the trace and its metrics."""
    res = simulate(spec, seed)
    return res.trace, res.metrics()
