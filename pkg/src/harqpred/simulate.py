"""Protocol-level oracles: exact path enumeration and Monte-Carlo replay.

Both replay the transmit timeline directly instead of using the closed
forms in :mod:`harqpred.model`: one RV per slot, the feedback for RV ``i``
acts ``feedback_delay`` slots later, the burst ends at the first ACK or
after ``n`` RVs. A trial fails if the block is not decodable from the RVs
that were actually sent.

Monte-Carlo draws come in fixed blocks of trials; block ``b`` uses its own
PCG64 stream spawned from ``(seed, b)``, so results do not depend on how
blocks are spread over worker threads.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import norm

from . import kernels
from .errors import ConfigurationError
from .model import (
    Evaluation,
    OperatingPoint,
    Scenario,
    confusion,
    energy_efficiency,
    evaluate_reactive,
)

__all__ = ["TrialOutcome", "SimStats", "play_trial", "enumerate_exact", "simulate", "MAX_ENUM_RVS"]

MAX_ENUM_RVS = 12
BLOCK_TRIALS = 1 << 15
Z99 = float(norm.ppf(0.995))


@dataclass(frozen=True)
class TrialOutcome:
    transmissions_sent: int
    delivered: bool
    first_decode_rv: int | None


def play_trial(n: int, delay: int, decodes: Sequence[bool], acks: Sequence[bool] | None = None) -> TrialOutcome:
    """Replay one realization of a proactive burst.

    ``decodes[i]`` says whether combining RV i+1 would let a decoder that
    failed so far succeed. ``acks[i]`` is the predictor's answer after RV
    i+1; without it the feedback is the true decoder state.
    """
    first_dec = next((i + 1 for i, ok in enumerate(decodes[:n]) if ok), None)
    sent = n
    for i in range(n):
        decodable = first_dec is not None and i + 1 >= first_dec
        feedback = acks[i] if acks is not None else decodable
        if feedback:
            sent = min(i + 1 + delay, n)
            break
    return TrialOutcome(sent, first_dec is not None and first_dec <= sent, first_dec)


@dataclass(frozen=True)
class SimStats:
    """Sample statistics of a Monte-Carlo run with 99% normal-approximation CIs.

    Half-widths are NaN when fewer than two trials were run.
    """

    mean_t: float
    bler_hat: float
    ci_halfwidth_t: float
    ci_halfwidth_bler: float
    trials: int
    eta_hat: float = math.nan
    ci_halfwidth_eta: float = math.nan


def _schedule_sizes(scenario, schedule):
    sizes = tuple(int(s) for s in schedule)
    evaluate_reactive(scenario, sizes)  # validates budget and profile length
    return sizes


def enumerate_exact(
    scenario: Scenario,
    op_point: OperatingPoint | None = None,
    schedule: Sequence[int] | None = None,
) -> Evaluation:
    """Exact evaluation by summing over every decode/prediction outcome path.

    Without ``op_point`` the feedback is the true decoder state (proactive
    HARQ); with it, feedback comes from the predictors; with ``schedule``
    the reactive scheme is replayed instead. The state space grows as
    ``2**n`` (``4**n`` with prediction), so at most 12 RVs are accepted.
    """
    if schedule is not None:
        sizes = _schedule_sizes(scenario, schedule)
        total = sum(sizes)
        if total > MAX_ENUM_RVS:
            raise ConfigurationError(f"enumeration limited to {MAX_ENUM_RVS} RVs, schedule uses {total}")
        eps = np.asarray(scenario.profile.eps[:total], dtype=float)
        pmf, fail = kernels.enumerate_schedule(eps, np.cumsum(np.asarray(sizes, dtype=np.int64)))
        pmf = np.concatenate([pmf, np.zeros(max(0, scenario.n - total))])
    else:
        n = scenario.n
        if n > MAX_ENUM_RVS:
            raise ConfigurationError(f"enumeration limited to {MAX_ENUM_RVS} RVs, scenario has {n}")
        eps = np.asarray(scenario.profile.eps[:n], dtype=float)
        if op_point is None:
            fp = fn = np.zeros(n)
        else:
            fp, fn = (np.asarray(v, dtype=float) for v in confusion(scenario, op_point))
        pmf, fail = kernels.enumerate_burst(eps, fp, fn, scenario.feedback_delay, op_point is not None)
    pmf = [float(p) for p in pmf]
    e_t = math.fsum(t * p for t, p in enumerate(pmf))
    fail = min(max(float(fail), 0.0), 1.0)
    eta = energy_efficiency(e_t, fail, scenario.n_bits, scenario.p_rv)
    return Evaluation(e_t, fail, eta, tuple(pmf))


def _block_rng(seed, block):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))


def simulate(
    scenario: Scenario,
    op_point: OperatingPoint | None = None,
    *,
    trials: int,
    seed: int,
    schedule: Sequence[int] | None = None,
    workers: int = 1,
) -> SimStats:
    """Monte-Carlo estimate of E[T], BLER and energy efficiency.

    Deterministic for a given ``seed`` regardless of ``workers``.
    """
    trials = int(trials)
    if trials < 1:
        raise ConfigurationError("need at least one trial")
    if schedule is not None:
        sizes = _schedule_sizes(scenario, schedule)
        cum = np.cumsum(np.asarray(sizes, dtype=np.int64))
        eps = np.asarray(scenario.profile.eps[: int(cum[-1])], dtype=float)
        width = eps.shape[0]

        def replay(u):
            return kernels.replay_schedule(eps, cum, u)

    else:
        n = scenario.n
        eps = np.asarray(scenario.profile.eps[:n], dtype=float)
        predict = op_point is not None
        if predict:
            fp, fn = (np.asarray(v, dtype=float) for v in confusion(scenario, op_point))
        else:
            fp = fn = np.zeros(n)
        width = 2 * n if predict else n
        delay = scenario.feedback_delay

        def replay(u):
            return kernels.replay_burst(eps, fp, fn, delay, u[:, :n], u[:, n:], predict)

    def run_block(block):
        size = min(BLOCK_TRIALS, trials - block * BLOCK_TRIALS)
        u = _block_rng(seed, block).random((size, width))
        sent, delivered = replay(u)
        return (
            int(sent.sum()),
            int(np.dot(sent, sent)),
            int(delivered.sum()),
            int(sent[delivered].sum()),
        )

    n_blocks = -(-trials // BLOCK_TRIALS)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run_block, range(n_blocks)))
    else:
        parts = [run_block(b) for b in range(n_blocks)]
    s1, s2, d, ds = (sum(col) for col in zip(*parts))
    return _stats(trials, s1, s2, d, ds, scenario.n_bits, scenario.p_rv)


def _stats(N, s1, s2, d, ds, n_bits, p_rv):
    mean_t = s1 / N
    bler = (N - d) / N
    eta = (n_bits * d) / (p_rv * s1)
    if N < 2:
        return SimStats(mean_t, bler, math.nan, math.nan, N, eta, math.nan)
    var_t = (N * s2 - s1 * s1) / (N * (N - 1))
    var_b = bler * (1.0 - bler) * N / (N - 1)
    # delta method for the ratio of mean reward to mean energy
    resid = (n_bits * n_bits) * d - 2.0 * n_bits * eta * p_rv * ds + (eta * p_rv) ** 2 * s2
    var_eta = max(resid, 0.0) / (N - 1) / (p_rv * mean_t) ** 2
    return SimStats(
        mean_t,
        bler,
        Z99 * math.sqrt(max(var_t, 0.0) / N),
        Z99 * math.sqrt(var_b / N),
        N,
        eta,
        Z99 * math.sqrt(var_eta / N),
    )
