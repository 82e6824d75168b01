"""Operating-point and redundancy-schedule optimization.

Predictive HARQ chooses per-RV false-positive rates that minimize the
expected number of transmissions while keeping the total BLER at or
below the target. Raising a false-positive rate lowers the matching
false-negative rate (earlier ACKs, fewer RVs) but lets more undecodable
blocks stop early, so the BLER constraint is what limits the gain.

The local solver is a feasible trust-region method: every iterate
satisfies the bounds and the BLER constraint, and a step is accepted only
if it lowers the objective. Derivatives are forward differences. Random
restarts cover the non-convexity introduced by piecewise-linear ROCs.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConfigurationError, InfeasibleError
from .model import (
    Evaluation,
    OperatingPoint,
    Scenario,
    evaluate_predictive,
    evaluate_reactive,
    max_retransmissions,
)

__all__ = [
    "OptimizationResult",
    "optimize_operating_point",
    "optimize_reactive_schedule",
    "BurstObjective",
    "DEFAULT_RESTARTS",
]

DEFAULT_RESTARTS = 32
FD_STEP = 1e-6
FEAS_TOL = 1e-9


@dataclass(frozen=True)
class OptimizationResult:
    """Best feasible solution found.

    ``converged`` has one flag per local solve (the origin start first,
    then the random restarts); ``history`` holds the objective at every
    accepted iterate of the winning solve.
    """

    evaluation: Evaluation
    op_point: OperatingPoint | None = None
    schedule: tuple[int, ...] | None = None
    restarts_used: int = 0
    converged: tuple[bool, ...] = ()
    history: tuple[float, ...] = ()

    @property
    def objective(self) -> float:
        return self.evaluation.expected_transmissions


class BurstObjective:
    """Vectorized E[T] and BLER of predictive HARQ over the free coordinates.

    Only the first ``n - feedback_delay - 1`` predictors can shorten a
    burst; later ones are pinned to ``p_fp = 0``.
    """

    def __init__(self, scenario: Scenario):
        if scenario.roc is None:
            raise ConfigurationError("operating-point optimization needs a ROC set")
        self.scenario = scenario
        self.n = scenario.n
        self.delay = scenario.feedback_delay
        self.dim = max(0, self.n - self.delay - 1)
        self.eps = np.asarray(scenario.profile.eps[: self.n], dtype=float)
        self._curves = [(np.asarray(c.p_fp), np.asarray(c.p_fn)) for c in scenario.roc.curves[: self.n]]

    def full(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        fp = np.zeros((x.shape[0], self.n))
        fp[:, : self.dim] = x
        return fp

    def __call__(self, x):
        """Return ``(e_t, bler)`` arrays for a batch of points (rows)."""
        fp = self.full(x)
        fn = np.empty_like(fp)
        for i, (xp, yp) in enumerate(self._curves):
            fn[:, i] = np.interp(fp[:, i], xp, yp)
        return kernels.batch_burst(self.eps, fp, fn, self.delay)


def _gradients(obj, x, f, c):
    k = x.size
    pts = np.repeat(x[None, :], k, axis=0)
    h = np.where(x + FD_STEP <= 1.0, FD_STEP, -FD_STEP)
    pts[np.arange(k), np.arange(k)] += h
    fs, cs = obj(pts)
    return (fs - f) / h, (cs - c) / h


def _subproblem(g, a, slack, lo, hi, curvature):
    """Minimize ``g.s + curvature/2 |s|^2`` on ``lo <= s <= hi``, ``a.s <= slack``."""

    def step(mu):
        return np.clip(-(g + mu * a) / curvature, lo, hi)

    s = step(0.0)
    if a @ s <= slack:
        return s
    # a.s(mu) is piecewise linear and non-increasing in the multiplier mu;
    # its kinks are where a coordinate enters or leaves its bound.
    nz = a != 0.0
    kinks = np.concatenate([(-curvature * lo[nz] - g[nz]) / a[nz], (-curvature * hi[nz] - g[nz]) / a[nz]])
    mus = np.unique(np.concatenate([[0.0], kinks[kinks > 0.0]]))
    steps = np.clip(-(g[None, :] + mus[:, None] * a[None, :]) / curvature, lo, hi)
    phi = steps @ a
    j = int(np.argmax(phi <= slack))
    if phi[j] > slack:  # pragma: no cover - phi at the last kink is min over the box
        return steps[-1]
    if j == 0:
        return steps[0]
    lam = (phi[j - 1] - slack) / (phi[j - 1] - phi[j])
    mu = mus[j - 1] + lam * (mus[j] - mus[j - 1])
    s = step(mu)
    if a @ s > slack:
        s = steps[j]
    return s


def _local_solve(obj, x0, limit, max_iter=200, radius=0.2, min_radius=1e-7):
    x = np.clip(np.asarray(x0, dtype=float), 0.0, 1.0)
    f, c = (float(v[0]) for v in obj(x))
    history = [f]
    if x.size == 0:
        return x, f, history, True
    for _ in range(max_iter):
        g, a = _gradients(obj, x, f, c)
        gmax = float(np.max(np.abs(g)))
        if gmax == 0.0:
            return x, f, history, True
        curvature = gmax / radius
        lo = np.maximum(-radius, -x)
        hi = np.minimum(radius, 1.0 - x)
        s = _subproblem(g, a, max(limit - c, 0.0), lo, hi, curvature)
        predicted = -(g @ s + 0.5 * curvature * (s @ s))
        if predicted <= 1e-14 * max(1.0, abs(f)):
            return x, f, history, True
        trial = np.clip(x + s, 0.0, 1.0)
        ft, ct = (float(v[0]) for v in obj(trial))
        aa = float(a @ a)
        for _ in range(3):
            # second-order correction back onto the BLER constraint
            if ct <= limit or aa == 0.0:
                break
            trial = np.clip(trial - 1.05 * (ct - limit) / aa * a, 0.0, 1.0)
            ft, ct = (float(v[0]) for v in obj(trial))
        rho = (f - ft) / predicted
        if ct <= limit and ft < f and rho >= 0.1:
            x, f, c = trial, ft, ct
            history.append(f)
            if rho > 0.75 and np.max(np.abs(s)) >= 0.9 * radius:
                radius = min(2.0 * radius, 1.0)
        else:
            radius *= 0.25
            if radius < min_radius:
                return x, f, history, True
    return x, f, history, False


def _pull_back(obj, x, limit, iters=60):
    # BLER is non-decreasing in every coordinate, hence along the ray to 0.
    if obj(x)[1][0] <= limit:
        return x
    lo, hi = 0.0, 1.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if obj(mid * x)[1][0] <= limit:
            lo = mid
        else:
            hi = mid
    return lo * x


def optimize_operating_point(
    scenario: Scenario,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
    workers: int = 1,
) -> OptimizationResult:
    """Minimize E[T] of predictive HARQ subject to BLER <= eps_target.

    One local solve starts at the origin (never predict ACK); ``restarts``
    more start at uniform random points, pulled back toward the origin
    until feasible. Restart ``r`` draws from a stream spawned from
    ``(seed, r)``, so the result does not depend on ``workers``.

    Raises InfeasibleError if even the origin violates the target.
    """
    obj = BurstObjective(scenario)
    limit = scenario.eps_target
    origin = np.zeros(obj.dim)
    min_bler = float(obj(origin)[1][0])
    if min_bler > limit:
        raise InfeasibleError("BLER target unreachable with any operating point", min_bler)

    seeds = np.random.SeedSequence(seed).spawn(restarts)
    starts = [origin] + [np.random.default_rng(s).random(obj.dim) for s in seeds]

    def solve(x0):
        return _local_solve(obj, _pull_back(obj, x0, limit), limit)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(solve, starts))
    else:
        runs = [solve(x0) for x0 in starts]

    order = sorted(range(len(runs)), key=lambda r: (runs[r][1], r))
    for r in order:
        x, _, history, _ = runs[r]
        op = OperatingPoint(tuple(obj.full(x)[0].tolist()))
        ev = evaluate_predictive(scenario, op)
        if ev.total_bler <= limit + FEAS_TOL:
            return OptimizationResult(
                evaluation=ev,
                op_point=op,
                restarts_used=restarts,
                converged=tuple(run[3] for run in runs),
                history=tuple(history),
            )
    raise InfeasibleError("no restart produced a verified feasible point", min_bler)  # pragma: no cover


def _compositions(total, parts):
    if parts == 1:
        yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def optimize_reactive_schedule(scenario: Scenario) -> OptimizationResult:
    """Exhaustive search for the redundancy split minimizing E[T] of reactive HARQ.

    Candidates are all schedules ``(T_0, ..., T_m)`` with
    ``sum(T) + m * feedback_delay <= delay_budget`` whose total failure
    probability meets the target. Ties go to fewer transmissions, then to
    the lexicographically smaller schedule.
    """
    profile = scenario.profile
    cum = profile.cumulative()
    target = scenario.eps_target
    n_max = max_retransmissions(scenario)
    first_ok = next((s for s in range(1, profile.n + 1) if cum[s] <= target), None)
    cap0 = min(profile.n, scenario.delay_budget)
    if first_ok is None:
        raise InfeasibleError("no schedule reaches the BLER target", cum[cap0])

    best = None  # (e_t, m, sizes)
    for m in range(n_max + 1):
        cap = min(profile.n, scenario.delay_budget - m * scenario.feedback_delay)
        for total in range(max(first_ok, m + 1), cap + 1):
            for sizes in _compositions(total, m + 1):
                e_t = 0.0
                acc = 0
                for size in sizes:
                    e_t += cum[acc] * size
                    acc += size
                cand = (e_t, m, sizes)
                if best is None or e_t < best[0] - 1e-12 * max(1.0, best[0]):
                    best = cand
                elif abs(e_t - best[0]) <= 1e-12 * max(1.0, best[0]) and (m, sizes) < best[1:]:
                    best = cand
    if best is None:
        raise InfeasibleError("no schedule fits the delay budget and the BLER target", cum[cap0])
    sizes = best[2]
    ev = evaluate_reactive(scenario, sizes)
    if ev.total_bler > target + FEAS_TOL:  # pragma: no cover - guarded by the search
        raise InfeasibleError("schedule failed verification", ev.total_bler)
    return OptimizationResult(evaluation=ev, schedule=tuple(sizes), restarts_used=0, converged=(True,))

