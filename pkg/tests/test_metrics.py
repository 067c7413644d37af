"""Efficiency, optimal exponent, jump-count scaling and per-run statistics."""

import math

import numpy as np
import pytest

from levyforage import InsufficientDataError, ParameterError
from levyforage.forager import Budget
from levyforage.metrics import (RunMetrics, collection_rate_curve, compute_metrics, dumps_metrics,
                                efficiency, efficiency_from, encounter_jump_counts,
                                first_arrival_times, jump_count_scaling, loads_metrics,
                                measured_lambda, msd_curve, mu_opt, predicted_jump_count,
                                read_metrics, write_metrics)
from levyforage.scenarios import builtin, scaling_1d
from levyforage.simulation import run, simulate
from levyforage.trace import (A_TO_B, B_TO_A, COLLECTION, DETECTION, JUMP, MODE_SWITCH, Trace,
                              TraceEvent)


def synthetic(targets=3, flights=30, total=300.0, dim=1):
    """Evenly spaced flights; each group of flights ends on a target that is then collected."""
    per = flights // targets
    step = total / flights
    ev, d, x = [], 0.0, 0.0
    for k in range(targets):
        for _ in range(per):
            d += step
            x += step
            ev.append(TraceEvent(JUMP, d, (x,), step))
        ev.append(TraceEvent(DETECTION, d, (x,), k))
        ev.append(TraceEvent(MODE_SWITCH, d, (x,), A_TO_B))
        ev.append(TraceEvent(COLLECTION, d, (x,), k))
        ev.append(TraceEvent(MODE_SWITCH, d, (x,), B_TO_A))
    return Trace(dim, (0.0,), (1,) * targets, ev)


def test_efficiency_substitution():
    assert efficiency_from(2.0, 5.0) == pytest.approx(0.1)


def test_synthetic_trace_efficiency():
    tr = synthetic()
    assert efficiency(tr) == pytest.approx(0.01)
    assert efficiency(tr) == pytest.approx(3 / 300.0, rel=1e-12)
    m = compute_metrics(tr)
    assert m.eta == efficiency_from(m.mean_flight_length, m.flights_per_site)
    assert m.encounter_jump_counts == [10, 10, 10] and m.n_d == 10


def test_single_flight_onto_the_target():
    tr = synthetic(targets=1, flights=1, total=7.0)
    m = compute_metrics(tr)
    assert m.flights_per_site == 1
    assert m.eta == pytest.approx(1.0 / m.mean_flight_length)


def test_efficiency_edge_cases():
    with pytest.raises(ValueError):
        efficiency(Trace(1, (0.0,)))
    tr = Trace(1, (0.0,), (), [TraceEvent(JUMP, 4.0, (4.0,), 4.0)])
    m = compute_metrics(tr)
    assert efficiency(tr) == 0.0 and m.eta == 0.0 and m.no_arrival and m.first_arrival == []


def test_eta_matches_sites_over_distance_on_real_runs():
    for name in ("A2D", "B2D"):
        tr, m = run(builtin(name), 3)
        assert m.eta == pytest.approx(m.sites_visited / m.total_distance, rel=1e-9)


def test_mu_opt_values():
    assert mu_opt(math.e, 1.0) == 1.0
    assert mu_opt(math.e ** 2, 1.0) == 1.5
    assert mu_opt(math.e * 3.0, 3.0) == pytest.approx(1.0)
    assert 1.95 < mu_opt(1e9, 1.0) < 2.0


def test_mu_opt_monotone_and_bounded():
    ratios = np.geomspace(1.01, 1e12, 400)
    vals = [mu_opt(r, 1.0) for r in ratios]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    assert max(vals) < 2.0


@pytest.mark.parametrize("ratio", [1.0, 0.5])
def test_mu_opt_domain(ratio):
    with pytest.raises(ParameterError):
        mu_opt(ratio, 1.0)


def test_predicted_jump_count():
    assert predicted_jump_count(10.0, 1.0, 2.0) == pytest.approx(10.0)


def test_encounter_counts_and_lambda():
    tr = synthetic()
    assert encounter_jump_counts(tr) == [10, 10, 10]
    assert measured_lambda(tr) == pytest.approx(100.0)


def test_scaling_needs_three_ratios():
    groups = {10.0: [synthetic()] * 100, 30.0: [synthetic()] * 100}
    with pytest.raises(InsufficientDataError):
        jump_count_scaling(groups, 1.0)


def test_scaling_needs_replicates():
    groups = {r: [synthetic()] * 5 for r in (10.0, 30.0, 100.0)}
    with pytest.raises(InsufficientDataError):
        jump_count_scaling(groups, 1.0)


def test_scaling_recovers_a_planted_power_law():
    # oracle: traces built so the mean jump count is exactly ratio ** 1.5
    groups = {}
    for r in (4.0, 16.0, 64.0):
        n = int(round(r ** 1.5))
        groups[r] = [synthetic(targets=1, flights=n, total=float(n))] * 100
    fit = jump_count_scaling(groups, 1.0)
    assert fit.slope == pytest.approx(1.5, abs=1e-9) and fit.r2 == pytest.approx(1.0)


def sweep(mu, ratios=(10.0, 30.0, 100.0), reps=200):
    groups = {}
    for c, ratio in enumerate(ratios):
        spec = scaling_1d(ratio, mu=mu)
        groups[ratio] = [simulate(spec, 1000 * c + r).trace for r in range(reps)]
    return jump_count_scaling(groups, 1.0)


def test_scaling_mu2():
    fit = sweep(2.0)
    assert fit.slope == pytest.approx(1.0, abs=0.2)
    # the ratio 10 cell sits near the predicted N_d = 10
    assert fit.means[0] == pytest.approx(predicted_jump_count(10.0, 1.0, 2.0), rel=0.5)


def test_scaling_mu3():
    # finite-variance first passage carries a log correction here, so the fit
    # lands near the low edge of the band
    fit = sweep(3.0)
    assert fit.slope == pytest.approx(2.0, abs=0.3)
    assert fit.slope > sweep(2.0).slope + 0.5


def test_first_arrivals_scenario_b():
    tr, m = run(builtin("B2D"), 2)
    arr = first_arrival_times(tr)
    assert [k for k, _ in arr] == [0, 1]
    assert all(math.isfinite(t) and t > 0 for _, t in arr)
    assert m.t_a == min(t for _, t in arr)


def test_first_arrivals_with_field():
    res = simulate(builtin("C3D"), 1)
    assert first_arrival_times(res.trace, res.field) == first_arrival_times(res.trace)
    assert len(first_arrival_times(res.trace)) == 4


def test_first_arrival_sorted_by_time_when_reindexed():
    tr, _ = run(builtin("C3D"), 2)
    times = sorted(t for _, t in first_arrival_times(tr))
    assert times == sorted(times)
    firsts = []
    seen = set()
    for e in tr.of_kind(COLLECTION):
        k = tr.cluster_of(e.payload)
        if k not in seen:
            seen.add(k)
            firsts.append(e.distance)
    assert firsts == times


def test_reward_at_start_arrives_within_rd():
    spec = builtin("A2D")
    import dataclasses
    spec = dataclasses.replace(spec, start=(0.0, 0.0))
    tr, m = run(spec, 1)
    assert m.t_a <= spec.r_d


def test_budget_truncated_run_has_no_arrival():
    spec = builtin("A2D").with_overrides(budget=Budget(distance=5.0))
    tr, m = run(spec, 1)
    assert first_arrival_times(tr) == [] and m.no_arrival and m.eta == 0.0
    assert m.t_a is None


def test_collection_rate_curve():
    assert collection_rate_curve(Trace(2, (0.0, 0.0))) == [(0.0, 0)]
    tr, m = run(builtin("A2D"), 4)
    curve = collection_rate_curve(tr)
    assert curve[-1][1] == 1000
    assert all(b[0] >= a[0] and b[1] >= a[1] for a, b in zip(curve, curve[1:]))


def test_msd_curve():
    tr = synthetic()
    msd = msd_curve(tr)
    assert msd[0] == (1, 100.0) and msd[-1] == (30, 90000.0)


def test_metrics_round_trip(tmp_path):
    tr, m = run(builtin("B2D").with_overrides(budget=Budget(jumps=50)), 1)
    write_metrics(m, tmp_path / "m.json", extra={"seed": 1})
    back = read_metrics(tmp_path / "m.json")
    assert dumps_metrics(back) == dumps_metrics(m)
    assert back.eta == m.eta and back.collection_rate == m.collection_rate


def test_metrics_json_handles_nan_and_inf():
    m = RunMetrics(eta=0.0, mean_flight_length=math.nan, flights_per_site=math.inf, flight_count=0,
                   sites_visited=0, total_distance=0.0, n_d=math.nan)
    back = loads_metrics(dumps_metrics(m))
    assert math.isnan(back.mean_flight_length) and back.flights_per_site == math.inf
