"""Statistical law checks and a trace invariant auditor.

Each check returns a :class:`CheckResult` carrying the measured values next
to what was expected, so the CLI and the test suite report the same thing.
Sample sizes and tolerances are module constants.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .forager import Budget, Forager
from .metrics import jump_count_scaling, mean_msd
from .rng import SeededRng, mix_seed
from .sampler import JumpLaw, sample_jump_lengths, tail_exponent_estimate
from .scenarios import biased_1d, builtin, scaling_1d, sparse_ndf_1d
from .simulation import build_field, simulate
from .sweep import SweepPlan, run_sweep, table_rows
from .trace import A_TO_B, B_TO_A, COLLECTION, DETECTION, JUMP, MODE_SWITCH
from .walkers import LevyWalker
from .world import DF, Domain, RewardField

TAIL_MUS = (1.5, 2.0, 2.5)
TAIL_SAMPLES = 1_000_000
TAIL_WINDOW = (10 ** 0.5, 10 ** 1.5)
TAIL_TOL = 0.1

SCALING_RATIOS = (10.0, 30.0, 100.0)
SCALING_MU = 2.0
SCALING_REPLICATES = 200
SCALING_REL_TOL = 0.2

DRIFT_PAIRS = 1000
DRIFT_MAGNITUDE = 0.5
DRIFT_ALPHA = 0.01

MSD_REPLICATES = 400
MSD_JUMPS = 200
MSD_LAW = JumpLaw(2.0, 1.0, 100.0)
MSD_MIN_R2 = 0.99

EFFICIENCY_MUS = (1.1, 1.5, 2.0, 2.5, 3.0)
EFFICIENCY_REPLICATES = 500

INVARIANT_RUNS = 100


@dataclass
class CheckResult:
    name: str
    passed: bool
    measured: dict = field(default_factory=dict)
    expected: str = ""

    def report(self) -> str:
        vals = ", ".join(f"{k}={_short(v)}" for k, v in self.measured.items())
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {vals} (expected {self.expected})"


def _short(v):
    if isinstance(v, float):
        return f"{v:.4g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(str(_short(x)) for x in v) + "]"
    return v


def check_tail(seed: int = 1, mus: Sequence[float] = TAIL_MUS, n: int = TAIL_SAMPLES) -> CheckResult:
    """CCDF slope of the untruncated law over one decade starting at ~3 ell_min."""
    slopes = []
    for k, mu in enumerate(mus):
        law = JumpLaw(mu, 1.0)
        xs = sample_jump_lengths(law, SeededRng(mix_seed(seed, k, 0)), n)
        slopes.append(tail_exponent_estimate(xs, *TAIL_WINDOW))
    errs = [abs(s - (1.0 - mu)) for s, mu in zip(slopes, mus)]
    return CheckResult("tail", all(e <= TAIL_TOL for e in errs),
                       {"mu": list(mus), "slope": slopes, "max_abs_error": max(errs)},
                       f"slope = 1 - mu within {TAIL_TOL}")


def check_scaling(seed: int = 1, ratios: Sequence[float] = SCALING_RATIOS, mu: float = SCALING_MU,
                  replicates: int = SCALING_REPLICATES) -> CheckResult:
    """Mean jumps to the first encounter against lambda / r_d on a log-log fit."""
    groups = {}
    for c, ratio in enumerate(ratios):
        spec = scaling_1d(ratio, mu=mu)
        groups[ratio * spec.r_d] = [simulate(spec, mix_seed(seed, c, r)).trace
                                    for r in range(replicates)]
    fit = jump_count_scaling(groups, r_d=1.0, min_replicates=replicates)
    target = mu - 1.0
    ok = abs(fit.slope - target) <= SCALING_REL_TOL * target
    return CheckResult("scaling", ok,
                       {"slope": fit.slope, "r2": fit.r2, "ratios": list(fit.ratios),
                        "mean_jumps": list(fit.means)},
                       f"slope = {target:g} within {SCALING_REL_TOL:.0%}")


def sign_test_p(wins: int, losses: int) -> float:
    """One-sided exact binomial sign test: P(X >= wins) for X ~ Bin(wins + losses, 1/2)."""
    n = wins + losses
    if n == 0:
        return 1.0
    return sum(math.comb(n, k) for k in range(wins, n + 1)) / 2 ** n


def check_drift(seed: int = 1, pairs: int = DRIFT_PAIRS,
                magnitude: float = DRIFT_MAGNITUDE) -> CheckResult:
    """Paired first-arrival distances with and without drift away from the target.

    Each pair shares one seed. A run that never arrives is censored at its
    distance budget, which ranks it after every arrival.
    """
    biased, plain = biased_1d(drift=magnitude), biased_1d(drift=0.0)
    cap = biased.budget.distance
    wins = losses = 0
    sums = [0.0, 0.0]
    censored = [0, 0]
    for r in range(pairs):
        s = mix_seed(seed, 0, r)
        t = []
        for j, spec in enumerate((biased, plain)):
            t_a = simulate(spec, s).metrics_summary().t_a
            if t_a is None:
                censored[j] += 1
                t_a = math.inf
            sums[j] += min(t_a, cap)
            t.append(t_a)
        wins += t[0] > t[1]
        losses += t[0] < t[1]
    p = sign_test_p(wins, losses)
    mean_b, mean_p = sums[0] / pairs, sums[1] / pairs
    return CheckResult("drift", p < DRIFT_ALPHA and mean_b > mean_p,
                       {"mean_t_a_biased": mean_b, "mean_t_a_unbiased": mean_p,
                        "biased_slower": wins, "biased_faster": losses, "p_value": p,
                        "censored": censored},
                       f"biased mean larger, sign test p < {DRIFT_ALPHA}")


def check_msd(seed: int = 1, replicates: int = MSD_REPLICATES, jumps: int = MSD_JUMPS,
              law: JumpLaw = MSD_LAW) -> CheckResult:
    """Endpoint MSD of a truncated-law walk grows linearly in the jump count."""
    domain = Domain.box(1e3 * law.ell_max * math.sqrt(jumps), 2)
    traces = []
    for r in range(replicates):
        f = RewardField(domain, [], [], r_d=law.ell_min)
        fg = Forager(f, LevyWalker(law), SeededRng(mix_seed(seed, 0, r)), (0.0, 0.0),
                     budget=Budget(jumps=jumps))
        traces.append(fg.run())
    msd = mean_msd(traces, jumps)
    n = np.arange(1, jumps + 1, dtype=float)
    slope, intercept = np.polyfit(n, msd, 1)
    resid = msd - (slope * n + intercept)
    r2 = 1.0 - float((resid ** 2).sum()) / float(((msd - msd.mean()) ** 2).sum())
    return CheckResult("msd", r2 >= MSD_MIN_R2,
                       {"r2": r2, "slope": float(slope), "mean_sq_jump": _second_moment(law)},
                       f"R^2 >= {MSD_MIN_R2}, slope near the mean squared jump")


def _second_moment(law: JumpLaw) -> float:
    m, lo, hi = law.mu, law.ell_min, law.ell_max
    norm = (lo ** (1 - m) - hi ** (1 - m)) / (m - 1)
    if m == 3.0:
        return math.log(hi / lo) / norm
    return (hi ** (3 - m) - lo ** (3 - m)) / (3 - m) / norm


def efficiency_plan(replicates: int = EFFICIENCY_REPLICATES, seed: int = 1, jobs: int = 1,
                    mus: Sequence[float] = EFFICIENCY_MUS) -> SweepPlan:
    return SweepPlan(sparse_ndf_1d(), mus=list(mus), replicates=replicates, base_seed=seed,
                     jobs=jobs)


def check_efficiency(replicates: int = EFFICIENCY_REPLICATES, seed: int = 1,
                     jobs: int = 1) -> CheckResult:
    """Efficiency over the mu grid on sparse revisitable targets."""
    plan = efficiency_plan(replicates, seed, jobs)
    rows = table_rows(plan, run_sweep(plan))
    mus = [r["mu"] for r in rows]
    means = [r["eta_mean"] for r in rows]
    best = int(np.argmax(means))
    at2, at3 = mus.index(2.0), mus.index(3.0)
    peak_ok = abs(best - at2) <= 1
    band_ok = rows[at2]["eta_p10"] > rows[at3]["eta_p90"]
    failed = sum(r["failed"] for r in rows)
    return CheckResult("efficiency", peak_ok and band_ok and means[at2] > means[at3] and not failed,
                       {"mu": mus, "eta_mean": means, "argmax_mu": mus[best],
                        "eta2_p10": rows[at2]["eta_p10"], "eta3_p90": rows[at3]["eta_p90"]},
                       "argmax at mu=2 or a neighbour, p10(eta at 2) > p90(eta at 3)")


# -- automaton invariants ----------------------------------------------------


def audit_run(spec, seed: int, res=None) -> list[str]:
    """Replay a run's trace against a fresh copy of its reward field.

    Returns a list of violations (empty when the run is clean).
    """
    if res is None:
        res = simulate(spec, seed)
    field0 = build_field(spec, seed)
    pts, r = field0.points, field0.r_point
    arr = np.asarray(pts, dtype=float).reshape(len(pts), spec.dimension)
    collected = [0] * len(pts)
    mode = "A"
    bad: list[str] = []

    def in_range(pos):
        return np.flatnonzero(np.sqrt(((arr - np.asarray(pos)) ** 2).sum(axis=1)) <= r).tolist()

    last_detection = None
    for k, e in enumerate(res.trace.events):
        where = f"event {k} ({e.kind})"
        if not spec.domain.contains(e.position, 1e-9):
            bad.append(f"{where}: position outside the domain")
        if e.kind == DETECTION:
            if mode != "A":
                bad.append(f"{where}: detection outside mode A")
            if e.payload not in in_range(e.position):
                bad.append(f"{where}: detected reward {e.payload} is out of range")
            if spec.mode == DF and collected[e.payload]:
                bad.append(f"{where}: detected an already collected reward")
            last_detection = k
        elif e.kind == MODE_SWITCH and e.payload == A_TO_B:
            if mode != "A":
                bad.append(f"{where}: A>B while in mode B")
            if last_detection != k - 1:
                bad.append(f"{where}: A>B without a detection")
            live = [i for i in in_range(e.position) if not (spec.mode == DF and collected[i])]
            if not live:
                bad.append(f"{where}: A>B with nothing in range")
            mode = "B"
        elif e.kind == MODE_SWITCH and e.payload == B_TO_A:
            if mode != "B":
                bad.append(f"{where}: B>A while in mode A")
            # ndf: rewards collected earlier may still be dormant
            left = [i for i in in_range(e.position) if not collected[i]]
            if left:
                bad.append(f"{where}: B>A with rewards {left[:5]} still in range")
            mode = "A"
        elif e.kind == COLLECTION:
            if mode != "B":
                bad.append(f"{where}: collection outside mode B")
            i = e.payload
            if tuple(e.position) != tuple(pts[i]):
                bad.append(f"{where}: collected away from the reward")
            if spec.mode == DF and collected[i]:
                bad.append(f"{where}: reward {i} collected twice")
            collected[i] += 1
        elif e.kind == JUMP and mode != "A":
            bad.append(f"{where}: jump in mode B")
    f = res.field
    if sum(collected) != f.n_collected:
        bad.append(f"collection events {sum(collected)} != field count {f.n_collected}")
    unique = sum(1 for c in collected if c)
    if unique != f.unique_collected:
        bad.append(f"unique collections {unique} != field count {f.unique_collected}")
    if spec.mode == DF and f.remaining + unique != len(pts):
        bad.append(f"reward count not conserved: {f.remaining} + {unique} != {len(pts)}")
    return bad


def random_invariant_case(k: int, seed: int):
    """A randomised but reproducible scenario for the invariant sweep."""
    rng = SeededRng(mix_seed(seed, 1, k))
    base = builtin(("A2D", "B2D", "C3D", "BIASED1D")[rng.integer(4)])
    mode = ("df", "ndf")[rng.integer(2)]
    mu = 1.1 + 1.9 * rng.uniform()
    walker = ("levy", "levy", "brownian", "uniform-random")[rng.integer(4)]
    spec = base.with_overrides(mu=mu, mode=mode, walker=walker,
                               budget=Budget(jumps=20 + rng.integer(150)))
    spec = dataclasses.replace(spec, boundary=("clip", "reflect", "wrap")[rng.integer(3)])
    return spec, mix_seed(seed, 2, k)


def check_invariants(runs: int = INVARIANT_RUNS, seed: int = 1) -> CheckResult:
    violations = []
    for k in range(runs):
        spec, s = random_invariant_case(k, seed)
        violations += [f"run {k} ({spec.name}): {v}" for v in audit_run(spec, s)]
    return CheckResult("invariants", not violations,
                       {"runs": runs, "violations": len(violations),
                        "first": violations[0] if violations else "none"},
                       "zero violations")


CHECKS: dict[str, Callable[..., CheckResult]] = {
    "tail": check_tail,
    "scaling": check_scaling,
    "drift": check_drift,
    "msd": check_msd,
    "efficiency": check_efficiency,
    "invariants": check_invariants,
}
