import numpy as np
import pytest

from harqpred import (
    ErrorProfile,
    InfeasibleError,
    OperatingPoint,
    RocSet,
    Scenario,
    evaluate_predictive,
    evaluate_proactive,
    evaluate_reactive,
    optimize_operating_point,
    optimize_reactive_schedule,
)
from harqpred.optimize import BurstObjective, _local_solve, _subproblem
from harqpred.roc import binormal_curve, perfect_curve
from harqpred.scenarios import lognormal_profile
from oracles import grid_search_n3, reactive_brute_force


def _scenario(m50=3.0, n=14, delay=3, target=0.01, dprime=3.0, budget=None):
    prof = lognormal_profile(m50, 0.35, n)
    return Scenario(budget or n, delay, 1000, 1.0, target, prof, RocSet.uniform(binormal_curve(dprime), n))


def test_infeasible_reports_min_bler():
    sc = _scenario(m50=12.0, n=14, target=0.01)
    with pytest.raises(InfeasibleError) as info:
        optimize_operating_point(sc, restarts=2)
    assert info.value.min_bler == pytest.approx(evaluate_predictive(sc, OperatingPoint.zeros(14)).total_bler)
    assert info.value.min_bler > 0.01


def test_perfect_roc_without_slack_stays_proactive():
    prof = lognormal_profile(3.0, 0.35, 10)
    base = Scenario(10, 2, 100, 1.0, 0.5, prof, RocSet.uniform(perfect_curve(), 10))
    pa = evaluate_proactive(base)
    sc = Scenario(10, 2, 100, 1.0, pa.total_bler, prof, base.roc)
    res = optimize_operating_point(sc, restarts=4)
    assert pa.expected_transmissions - 1e-9 <= res.objective <= pa.expected_transmissions
    assert max(res.op_point.p_fp) <= 1e-9


def test_perfect_roc_spends_bler_slack():
    # with p_fn = 0 everywhere, false ACKs only cost BLER; a loose target buys shorter bursts
    prof = lognormal_profile(3.0, 0.35, 10)
    sc = Scenario(10, 2, 100, 1.0, 0.01, prof, RocSet.uniform(perfect_curve(), 10))
    res = optimize_operating_point(sc, restarts=4)
    assert res.objective < evaluate_proactive(sc).expected_transmissions
    assert res.evaluation.total_bler <= 0.01 + 1e-9


@pytest.mark.parametrize("seed", range(6))
def test_feasible_and_dominant(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 15))
    sc = _scenario(m50=float(rng.uniform(1.2, 4)), n=n, delay=int(rng.integers(1, min(6, n))), target=float(rng.choice([0.1, 0.01])), dprime=float(rng.uniform(1, 5)))
    try:
        res = optimize_operating_point(sc, restarts=8, seed=seed)
    except InfeasibleError:
        pytest.skip("random scenario infeasible")
    again = evaluate_predictive(sc, res.op_point)
    assert again.total_bler <= sc.eps_target + 1e-9
    assert res.objective <= evaluate_predictive(sc, OperatingPoint.zeros(n)).expected_transmissions + 1e-9


def test_history_is_monotone():
    sc = _scenario(delay=4, target=0.05)
    obj = BurstObjective(sc)
    x, f, hist, _ = _local_solve(obj, np.full(obj.dim, 0.001), sc.eps_target)
    assert all(b < a for a, b in zip(hist, hist[1:]))
    assert hist[-1] == f


def test_deterministic_and_worker_independent():
    sc = _scenario(delay=3, target=0.01)
    a = optimize_operating_point(sc, restarts=10, seed=42)
    b = optimize_operating_point(sc, restarts=10, seed=42, workers=4)
    assert a == b
    assert a.restarts_used == 10 and len(a.converged) == 11


def test_subproblem_respects_constraints():
    rng = np.random.default_rng(0)
    for _ in range(200):
        k = 5
        g = rng.normal(size=k)
        a = np.abs(rng.normal(size=k))
        lo, hi = -rng.random(k), rng.random(k)
        slack = float(rng.random())
        s = _subproblem(g, a, slack, lo, hi, 2.0)
        assert np.all(s >= lo - 1e-15) and np.all(s <= hi + 1e-15)
        assert a @ s <= slack + 1e-12


@pytest.mark.parametrize("case", range(4))
def test_grid_oracle_n3(case):
    rng = np.random.default_rng(100 + case)
    eps = (float(rng.uniform(0.3, 0.9)), float(rng.uniform(0.1, 0.5)), float(rng.uniform(0.0, 0.1)))
    d = float(rng.uniform(1.0, 3.0))
    curve = binormal_curve(d, 11)
    target = float(np.prod(eps)) + float(rng.uniform(0.02, 0.2))
    sc = Scenario(3, 1, 100, 1.0, target, ErrorProfile(eps), RocSet.uniform(curve, 3))
    res = optimize_operating_point(sc, restarts=8, seed=case)
    best, _, slack = grid_search_n3(eps, 1, [curve.points] * 3, target)
    assert res.objective <= best + slack + 1e-12


def test_reactive_single_transmission_budget():
    prof = ErrorProfile((0.6, 0.3, 0.05, 0.0))
    sc = Scenario(4, 3, 100, 1.0, 0.1, prof)
    res = optimize_reactive_schedule(sc)
    # only one transmission fits; the shortest one meeting the target is the cheapest
    assert res.schedule == (3,)
    assert res.objective == 3


def test_reactive_all_zero_profile():
    sc = Scenario(6, 2, 100, 1.0, 0.01, ErrorProfile((0.0,) * 6))
    res = optimize_reactive_schedule(sc)
    assert res.schedule == (1,) and res.objective == 1


def test_reactive_budget6_three_rvs():
    eps = (0.5, 0.3, 0.1)
    sc = Scenario(6, 2, 100, 1.0, 0.2, ErrorProfile(eps))
    res = optimize_reactive_schedule(sc)
    e_t, sched = reactive_brute_force(eps, 6, 2, 0.2)
    assert res.schedule == sched and res.objective == pytest.approx(e_t, abs=1e-12)


@pytest.mark.parametrize("seed", range(8))
def test_reactive_random_against_brute_force(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 8))
    eps = tuple(float(v) for v in rng.uniform(0.05, 0.9, n))
    budget = int(rng.integers(n, n + 8))
    delay = int(rng.integers(1, 4))
    target = float(rng.uniform(0.01, 0.3))
    sc = Scenario(budget, delay, 100, 1.0, target, ErrorProfile(eps))
    ref = reactive_brute_force(eps, budget, delay, target)
    if ref is None:
        with pytest.raises(InfeasibleError):
            optimize_reactive_schedule(sc)
        return
    res = optimize_reactive_schedule(sc)
    assert res.schedule == ref[1]
    assert res.objective == pytest.approx(ref[0], abs=1e-12)
    assert evaluate_reactive(sc, res.schedule).total_bler <= target + 1e-9


def test_reactive_infeasible():
    sc = Scenario(5, 1, 100, 1.0, 0.01, ErrorProfile((0.9, 0.8, 0.7)))
    with pytest.raises(InfeasibleError) as info:
        optimize_reactive_schedule(sc)
    assert info.value.min_bler == pytest.approx(0.9 * 0.8 * 0.7)
