"""Verification checks: the sign test, the invariant audit and small-sized runs."""

import dataclasses

import pytest
from scipy import stats

from levyforage.checks import (CheckResult, audit_run, check_drift, check_efficiency,
                               check_invariants, check_msd, random_invariant_case, sign_test_p)
from levyforage.forager import Budget
from levyforage.scenarios import builtin
from levyforage.simulation import simulate
from levyforage.trace import A_TO_B, B_TO_A, COLLECTION, JUMP, MODE_SWITCH, TraceEvent


@pytest.mark.parametrize("wins,losses", [(0, 0), (5, 5), (9, 1), (60, 40), (700, 300)])
def test_sign_test_matches_binomial(wins, losses):
    n = wins + losses
    expected = 1.0 if n == 0 else stats.binomtest(wins, n, 0.5, alternative="greater").pvalue
    assert sign_test_p(wins, losses) == pytest.approx(expected, rel=1e-9)


def test_report_format():
    r = CheckResult("x", True, {"a": 0.123456789}, "a > 0")
    assert r.report().startswith("PASS x: a=0.1235")


@pytest.fixture(scope="module")
def clean_run():
    spec = builtin("B2D").with_overrides(budget=Budget(jumps=300), mode="ndf")
    return spec, simulate(spec, 4)


def test_clean_run_has_no_violations(clean_run):
    spec, res = clean_run
    assert audit_run(spec, 4, res) == []


def corrupted(res, events):
    return dataclasses.replace(res, trace=dataclasses.replace(res.trace, events=events))


def test_audit_catches_collection_in_mode_a(clean_run):
    spec, res = clean_run
    ev = list(res.trace.events)
    k = next(i for i, e in enumerate(ev) if e.kind == JUMP)
    ev.insert(k + 1, TraceEvent(COLLECTION, ev[k].distance, ev[k].position, 0))
    bad = audit_run(spec, 4, corrupted(res, ev))
    assert any("collection outside mode B" in b for b in bad)


def test_audit_catches_premature_handback(clean_run):
    spec, res = clean_run
    ev = list(res.trace.events)
    k = next(i for i, e in enumerate(ev) if e.kind == MODE_SWITCH and e.payload == A_TO_B)
    ev.insert(k + 1, TraceEvent(MODE_SWITCH, ev[k].distance, ev[k].position, B_TO_A))
    bad = audit_run(spec, 4, corrupted(res, ev))
    assert any("still in range" in b for b in bad)


def test_audit_catches_double_collection_in_df():
    spec = builtin("A2D").with_overrides(budget=Budget(jumps=200))
    res = simulate(spec, 2)
    ev = list(res.trace.events)
    k = next(i for i, e in enumerate(ev) if e.kind == COLLECTION)
    ev.insert(k + 1, ev[k])
    bad = audit_run(spec, 2, corrupted(res, ev))
    assert any("collected twice" in b for b in bad)


def test_invariant_cases_are_reproducible():
    a, b = random_invariant_case(7, 1), random_invariant_case(7, 1)
    assert a == b and random_invariant_case(8, 1) != a


def test_small_invariant_sweep():
    assert check_invariants(runs=10).passed


def test_small_drift_check():
    r = check_drift(pairs=60)
    assert r.measured["p_value"] < 0.01 and r.measured["biased_slower"] > 50


def test_msd_check():
    assert check_msd().passed


def test_small_efficiency_sweep_orders_mu2_over_mu3():
    r = check_efficiency(replicates=10)
    eta = dict(zip(r.measured["mu"], r.measured["eta_mean"]))
    assert eta[2] > eta[3]
