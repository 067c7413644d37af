"""Search statistics computed from traces.

Conventions:

* A *flight* is a mode-A jump. All motion, including mode-B walks to
  rewards, counts toward total distance.
* Sites visited are collection events (in ndf a patch's rewards go dormant
  after collection, so every collection is a distinct visit).
* ``mean_flight_length`` is total distance over flights and
  ``flights_per_site`` is flights over sites, so
  ``eta = 1 / (mean_flight_length * flights_per_site)`` is exactly
  sites per unit distance.
* An *encounter* is a mode A -> B switch. Encounter jump counts are the
  flights flown since the previous hand-back to mode A (or the start).
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import InsufficientDataError, ParameterError
from .trace import A_TO_B, COLLECTION, JUMP, MODE_SWITCH, Trace


def efficiency_from(mean_flight_length: float, flights_per_site: float) -> float:
    """eta = 1 / (<x> N)."""
    return 1.0 / (mean_flight_length * flights_per_site)


def efficiency(trace: Trace) -> float:
    """Sites visited per unit distance; 0 when nothing was collected."""
    flights = sum(1 for e in trace.events if e.kind == JUMP)
    if flights == 0:
        raise ValueError("efficiency needs at least one flight")
    sites = sum(1 for e in trace.events if e.kind == COLLECTION)
    if sites == 0:
        return 0.0
    return efficiency_from(trace.total_distance / flights, flights / sites)


def mu_opt(lam: float, r_d: float) -> float:
    """Optimal exponent 2 - 1/ln(lambda/r_d) for sparse targets."""
    ratio = lam / r_d
    if not ratio > 1.0:
        raise ParameterError(f"lambda/r_d must exceed 1, got {ratio}")
    return 2.0 - 1.0 / math.log(ratio)


def predicted_jump_count(lam: float, r_d: float, mu: float) -> float:
    """N_d ~ (lambda/r_d)**(mu - 1)."""
    return (lam / r_d) ** (mu - 1.0)


def encounter_jump_counts(trace: Trace) -> list[int]:
    counts, n = [], 0
    for e in trace.events:
        if e.kind == JUMP:
            n += 1
        elif e.kind == MODE_SWITCH:
            if e.payload == A_TO_B:
                counts.append(n)
            n = 0
    return counts


def measured_lambda(trace: Trace) -> float:
    """Mean distance flown in mode A before each encounter."""
    legs, origin = [], 0.0
    for e in trace.events:
        if e.kind == MODE_SWITCH:
            if e.payload == A_TO_B:
                legs.append(e.distance - origin)
            else:
                origin = e.distance
    return float(np.mean(legs)) if legs else math.nan


def first_arrival_times(trace: Trace, field=None) -> list[tuple[int, float]]:
    """``(cluster id, distance at first collection)`` for every reached cluster, by id."""
    cluster_of = field.cluster_of.__getitem__ if field is not None else trace.cluster_of
    seen: dict[int, float] = {}
    for e in trace.events:
        if e.kind == COLLECTION:
            k = cluster_of(e.payload)
            if k not in seen:
                seen[k] = e.distance
    return sorted(seen.items())


def collection_rate_curve(trace: Trace) -> list[tuple[float, int]]:
    """Cumulative collections against distance, starting at (0, 0)."""
    curve = [(0.0, 0)]
    n = 0
    for e in trace.events:
        if e.kind == COLLECTION:
            n += 1
            curve.append((e.distance, n))
    return curve


def msd_curve(trace: Trace) -> list[tuple[int, float]]:
    """Squared displacement of each flight endpoint from the start, by jump index."""
    s = trace.start
    out = []
    k = 0
    for e in trace.events:
        if e.kind == JUMP:
            k += 1
            out.append((k, sum((a - b) ** 2 for a, b in zip(e.position, s))))
    return out


def mean_msd(traces: Sequence[Trace], n_jumps: int) -> np.ndarray:
    """Ensemble mean squared displacement after 1..n_jumps flights."""
    acc = np.zeros(n_jumps)
    for t in traces:
        sq = [v for _, v in msd_curve(t)]
        if len(sq) < n_jumps:
            raise InsufficientDataError("trace has fewer flights than requested")
        acc += sq[:n_jumps]
    return acc / len(traces)


@dataclass(frozen=True)
class ScalingFit:
    slope: float
    intercept: float
    r2: float
    ratios: tuple
    means: tuple
    replicates: tuple


def loglog_fit(x, y) -> tuple[float, float, float]:
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss = float(((ly - ly.mean()) ** 2).sum())
    r2 = 1.0 - float((resid ** 2).sum()) / ss if ss > 0 else 1.0
    return float(slope), float(intercept), r2


def jump_count_scaling(groups: Mapping[float, Sequence[Trace]], r_d: float,
                       min_replicates: int = 100) -> ScalingFit:
    """Fit log(mean encounter jump count) against log(lambda/r_d).

    ``groups`` maps each lambda to the traces run at that lambda; every
    encounter in every trace contributes one jump count. The slope
    estimates ``mu - 1``.
    """
    if len(groups) < 3:
        raise InsufficientDataError(f"need at least 3 lambda/r_d ratios, got {len(groups)}")
    ratios, means, reps = [], [], []
    for lam in sorted(groups):
        traces = groups[lam]
        if len(traces) < min_replicates:
            raise InsufficientDataError(f"lambda={lam}: {len(traces)} replicates, need {min_replicates}")
        counts = [c for t in traces for c in encounter_jump_counts(t)]
        if not counts:
            raise InsufficientDataError(f"lambda={lam}: no encounters recorded")
        ratios.append(lam / r_d)
        means.append(float(np.mean(counts)))
        reps.append(len(traces))
    slope, intercept, r2 = loglog_fit(ratios, means)
    return ScalingFit(slope, intercept, r2, tuple(ratios), tuple(means), tuple(reps))


@dataclass
class RunMetrics:
    eta: float
    mean_flight_length: float
    flights_per_site: float
    flight_count: int
    sites_visited: int
    total_distance: float
    n_d: float
    encounter_jump_counts: list = field(default_factory=list)
    first_arrival: list = field(default_factory=list)
    no_arrival: bool = False
    collection_rate: list = field(default_factory=list)
    msd: list = field(default_factory=list)
    lambda_configured: float = math.nan
    lambda_measured: float = math.nan

    @property
    def t_a(self) -> Optional[float]:
        """Distance to the first cluster reached, ``None`` without any arrival."""
        return min((t for _, t in self.first_arrival), default=None)


def compute_metrics(trace: Trace, lambda_configured: float = math.nan,
                    curves: bool = True) -> RunMetrics:
    """All run statistics; ``curves=False`` leaves the per-event curves empty."""
    flights = sum(1 for e in trace.events if e.kind == JUMP)
    sites = sum(1 for e in trace.events if e.kind == COLLECTION)
    dist = trace.total_distance
    if flights:
        mean_flight = dist / flights
        per_site = flights / sites if sites else math.inf
        eta = efficiency_from(mean_flight, per_site) if sites else 0.0
    else:
        # nothing flown: every collection happened from the start position
        mean_flight, per_site = math.nan, 0.0
        eta = sites / dist if dist > 0 else math.nan
    counts = encounter_jump_counts(trace)
    return RunMetrics(
        eta=eta,
        mean_flight_length=mean_flight,
        flights_per_site=per_site,
        flight_count=flights,
        sites_visited=sites,
        total_distance=dist,
        n_d=float(np.mean(counts)) if counts else math.nan,
        encounter_jump_counts=counts,
        first_arrival=[[k, t] for k, t in first_arrival_times(trace)],
        no_arrival=sites == 0,
        collection_rate=[[d, n] for d, n in collection_rate_curve(trace)] if curves else [],
        msd=[[k, v] for k, v in msd_curve(trace)] if curves else [],
        lambda_configured=lambda_configured,
        lambda_measured=measured_lambda(trace),
    )


def _encode(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None if math.isnan(v) else ("inf" if v > 0 else "-inf")
    if isinstance(v, list):
        return [_encode(x) for x in v]
    return v


def dumps_metrics(m: RunMetrics, extra: Optional[dict] = None) -> str:
    doc = {k: _encode(v) for k, v in asdict(m).items()}
    if extra:
        doc["run"] = extra
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


_FLOAT_FIELDS = ("eta", "mean_flight_length", "flights_per_site", "total_distance", "n_d",
                 "lambda_configured", "lambda_measured")


def loads_metrics(text: str) -> RunMetrics:
    doc = json.loads(text)
    doc.pop("run", None)
    for k in _FLOAT_FIELDS:
        v = doc[k]
        doc[k] = math.nan if v is None else float(v)
    return RunMetrics(**doc)


def write_metrics(m: RunMetrics, path, extra: Optional[dict] = None) -> None:
    Path(path).write_text(dumps_metrics(m, extra))


def read_metrics(path) -> RunMetrics:
    return loads_metrics(Path(path).read_text())
