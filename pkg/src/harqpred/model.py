"""Closed-form evaluation of reactive, proactive and predictive HARQ.

Time is counted in RV slots (one OFDM symbol each). A proactive transmitter
sends RV 1, 2, ... back to back; the feedback for RV ``i`` reaches it
``feedback_delay`` slots later, so the first ACK generated after RV ``i``
ends the burst after ``min(i + feedback_delay, n)`` transmissions.

Energy efficiency follows from the renewal-reward theorem: every packet is
one renewal cycle whose reward is ``n_bits`` on success and 0 on failure
and whose cost is the number of RVs sent times the per-RV energy.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

from .errors import ConfigurationError, ConstraintError, DomainError
from .roc import RocSet

__all__ = [
    "ErrorProfile",
    "Scenario",
    "OperatingPoint",
    "Evaluation",
    "energy_efficiency",
    "eeg",
    "evaluate_proactive",
    "evaluate_predictive",
    "evaluate_early_predictive",
    "evaluate_confusion",
    "confusion",
    "evaluate_reactive",
    "early_feedback",
    "reactive_failures",
    "max_retransmissions",
]


def _probability(x, what):
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"{what} must lie in [0, 1], got {x!r}")
    return x


@dataclass(frozen=True)
class ErrorProfile:
    """Conditional decoding-failure probabilities of successive RVs.

    ``eps[i - 1]`` is the probability that decoding still fails after
    combining RVs ``1..i``, given that it failed after ``1..i-1``.
    """

    eps: tuple[float, ...]

    def __post_init__(self):
        eps = tuple(_probability(e, "eps") for e in self.eps)
        if not eps:
            raise ConfigurationError("error profile needs at least one RV")
        object.__setattr__(self, "eps", eps)

    @property
    def n(self) -> int:
        return len(self.eps)

    def cumulative(self) -> list[float]:
        """``out[m]`` = probability that RVs 1..m all fail to decode; ``out[0] = 1``."""
        out = [1.0]
        for e in self.eps:
            out.append(out[-1] * e)
        return out

    @classmethod
    def from_cumulative(cls, failure: Sequence[float]) -> "ErrorProfile":
        """Build a profile from unconditional failure probabilities after 1..n RVs."""
        eps = []
        prev = 1.0
        for f in failure:
            f = float(f)
            if f > prev:
                raise ConfigurationError("cumulative failure probabilities must be non-increasing")
            eps.append(f / prev if prev > 0.0 else 0.0)
            prev = f
        return cls(tuple(min(e, 1.0) for e in eps))

    def truncated(self, n: int) -> "ErrorProfile":
        return ErrorProfile(self.eps[:n])


@dataclass(frozen=True)
class Scenario:
    """One evaluation setting: timing, payload, BLER target and link statistics.

    All delays are integer counts of RV slots. ``roc`` is only needed by the
    predictive schemes.
    """

    delay_budget: int
    feedback_delay: int
    n_bits: int
    p_rv: float
    eps_target: float
    profile: ErrorProfile
    roc: RocSet | None = field(default=None, compare=True)
    rv_duration: int = 1

    def __post_init__(self):
        for name in ("delay_budget", "feedback_delay", "n_bits", "rv_duration"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value:
                raise ConfigurationError(f"{name} must be an integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        object.__setattr__(self, "p_rv", float(self.p_rv))
        object.__setattr__(self, "eps_target", float(self.eps_target))
        if self.rv_duration != 1:
            raise ConfigurationError("rv_duration is fixed to one slot")
        if not 1 <= self.feedback_delay < self.delay_budget:
            raise ConfigurationError(
                f"need 1 <= feedback_delay < delay_budget, got "
                f"feedback_delay={self.feedback_delay}, delay_budget={self.delay_budget}"
            )
        if self.profile.n > self.delay_budget:
            raise ConfigurationError(
                f"profile has {self.profile.n} RVs but the delay budget allows {self.delay_budget}"
            )
        if not 0.0 < self.eps_target < 1.0:
            raise ConfigurationError(f"eps_target must lie in (0, 1), got {self.eps_target!r}")
        if self.n_bits <= 0:
            raise ConfigurationError("n_bits must be positive")
        if not self.p_rv > 0.0:
            raise ConfigurationError("p_rv must be positive")
        if self.roc is not None and len(self.roc) != self.profile.n:
            raise ConfigurationError(
                f"ROC set has {len(self.roc)} curves, profile has {self.profile.n} RVs"
            )

    @property
    def n(self) -> int:
        """Burst length: RVs a proactive transmitter sends without any ACK."""
        return min(self.profile.n, self.delay_budget)

    def with_feedback_delay(self, feedback_delay: int) -> "Scenario":
        return replace(self, feedback_delay=feedback_delay)


@dataclass(frozen=True)
class OperatingPoint:
    """Per-RV false-positive probabilities at which the predictors run."""

    p_fp: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "p_fp", tuple(_probability(p, "p_fp") for p in self.p_fp))

    def __len__(self):
        return len(self.p_fp)

    @classmethod
    def zeros(cls, n: int) -> "OperatingPoint":
        return cls((0.0,) * n)


@dataclass(frozen=True)
class Evaluation:
    """Outcome statistics of one scheme on one scenario.

    ``t_distribution[t]`` is the probability that exactly ``t`` RVs are sent.
    """

    expected_transmissions: float
    total_bler: float
    energy_efficiency: float
    t_distribution: tuple[float, ...]

    def mean_transmissions(self) -> float:
        return math.fsum(t * p for t, p in enumerate(self.t_distribution))


def energy_efficiency(e_t: float, total_bler: float, n_bits: int, p_rv: float) -> float:
    """Delivered bits per unit energy, ``(1 - bler) * n_bits / (E[T] * p_rv)``."""
    if not n_bits > 0:
        raise DomainError(f"n_bits must be positive, got {n_bits!r}")
    if not p_rv > 0:
        raise DomainError(f"p_rv must be positive, got {p_rv!r}")
    if not e_t >= 1:
        raise DomainError(f"expected transmissions must be at least 1, got {e_t!r}")
    if not 0.0 <= total_bler <= 1.0:
        raise DomainError(f"total_bler must lie in [0, 1], got {total_bler!r}")
    return (1.0 - total_bler) * n_bits / (e_t * p_rv)


def eeg(eta_h1: float, eta_h2: float) -> float:
    """Relative energy-efficiency gain of scheme 1 over scheme 2."""
    if not eta_h1 > 0:
        raise DomainError(f"reference efficiency must be positive, got {eta_h1!r}")
    return (eta_h1 - eta_h2) / eta_h1


def _evaluation(pmf, bler, scenario, expected=None):
    if expected is None:
        expected = 0.0
        for t, p in enumerate(pmf):
            expected += t * p
    eta = energy_efficiency(expected, bler, scenario.n_bits, scenario.p_rv)
    return Evaluation(expected, bler, eta, tuple(pmf))


def _proactive(eps, delay):
    n = len(eps)
    pmf = [0.0] * (n + 1)
    cum = [1.0]
    for e in eps:
        cum.append(cum[-1] * e)
    last = n - delay
    surv = 1.0
    # P_i = (prod_{k<i} eps_k)(1 - eps_i); eps at index `last` is forced to 0
    # so that later decodes, which cannot shorten the burst, land on t = n.
    for i in range(1, last):
        pmf[i + delay] = surv * (1.0 - eps[i - 1])
        surv = surv * eps[i - 1]
    pmf[n] += surv
    return pmf, cum[n]


def _predictive(eps, p_fp, p_fn, delay):
    n = len(eps)
    pmf = [0.0] * (n + 1)
    cum = [1.0]
    for e in eps:
        cum.append(cum[-1] * e)
    last = n - delay
    undecoded, decoded = 1.0, 0.0  # no ACK issued yet, split by decoder state
    nack_run = 1.0  # probability that every prediction so far was NACK given no decode
    fail = 0.0
    for i in range(1, last):
        e, fp, fn = eps[i - 1], p_fp[i - 1], p_fn[i - 1]
        still = undecoded * e
        done = decoded + undecoded * (1.0 - e)
        pmf[i + delay] = still * fp + done * (1.0 - fn)
        undecoded = still * (1.0 - fp)
        decoded = done * fn
        # a false ACK after RV i leaves only RVs up to i + delay for decoding
        fail += nack_run * fp * cum[i + delay]
        nack_run = nack_run * (1.0 - fp)
    pmf[n] += undecoded + decoded
    fail += nack_run * cum[n]
    return pmf, fail


def evaluate_proactive(scenario: Scenario) -> Evaluation:
    """Proactive HARQ: the burst stops once the first genuine ACK arrives."""
    eps = scenario.profile.eps[: scenario.n]
    pmf, bler = _proactive(eps, scenario.feedback_delay)
    return _evaluation(pmf, bler, scenario)


def evaluate_confusion(scenario: Scenario, p_fp: Sequence[float], p_fn: Sequence[float]) -> Evaluation:
    """Predictive proactive HARQ for explicit per-RV confusion probabilities.

    ``p_fp[i]`` is P(ACK | not decodable after RV i+1) and ``p_fn[i]`` is
    P(NACK | decodable after RV i+1). Once decodable, the block stays
    decodable, and each later prediction is an independent draw.
    """
    n = scenario.n
    p_fp = [_probability(p, "p_fp") for p in p_fp]
    p_fn = [_probability(p, "p_fn") for p in p_fn]
    if len(p_fp) != n or len(p_fn) != n:
        raise ConfigurationError(f"need {n} confusion probabilities per kind")
    pmf, bler = _predictive(scenario.profile.eps[:n], p_fp, p_fn, scenario.feedback_delay)
    return _evaluation(pmf, bler, scenario)


def confusion(scenario: Scenario, op_point: OperatingPoint) -> tuple[list[float], list[float]]:
    """Resolve an operating point into per-RV (P_fp, P_fn) lists via the ROC set."""
    if scenario.roc is None:
        raise ConfigurationError("predictive evaluation needs a ROC set")
    if len(op_point) != scenario.n:
        raise ConfigurationError(
            f"operating point has {len(op_point)} entries, scenario has {scenario.n} RVs"
        )
    p_fp = list(op_point.p_fp)
    p_fn = [float(curve(p)) for curve, p in zip(scenario.roc.curves, p_fp)]
    return p_fp, p_fn


def evaluate_predictive(scenario: Scenario, op_point: OperatingPoint) -> Evaluation:
    """Proactive HARQ whose feedback comes from per-RV decodability predictors."""
    p_fp, p_fn = confusion(scenario, op_point)
    return evaluate_confusion(scenario, p_fp, p_fn)


def early_feedback(scenario: Scenario) -> Scenario:
    """The same scenario with feedback one slot earlier (faster prediction)."""
    if scenario.feedback_delay < 2:
        raise ConfigurationError("feedback delay of 1 slot cannot be reduced further")
    return scenario.with_feedback_delay(scenario.feedback_delay - 1)


def evaluate_early_predictive(scenario: Scenario, op_point: OperatingPoint) -> Evaluation:
    return evaluate_predictive(early_feedback(scenario), op_point)


def max_retransmissions(scenario: Scenario) -> int:
    """Largest retransmission count whose shortest schedule fits the budget."""
    m = (scenario.delay_budget - 1) // (scenario.feedback_delay + 1)
    return min(m, scenario.profile.n - 1)


def reactive_failures(profile: ErrorProfile, sizes: Sequence[int]) -> tuple[float, ...]:
    """Conditional failure probability of each transmission of a schedule.

    Decoding depends only on the number of RVs accumulated so far, so a
    transmission adding RVs ``a+1..b`` fails with ``prod(eps[a+1..b])``
    given that the previous ones failed.
    """
    out = []
    start = 0
    for size in sizes:
        stop = start + size
        if stop > profile.n:
            raise ConstraintError(f"schedule needs {stop} RVs, profile defines {profile.n}")
        f = 1.0
        for e in profile.eps[start:stop]:
            f *= e
        out.append(f)
        start = stop
    return tuple(out)


def evaluate_reactive(
    scenario: Scenario,
    schedule: Sequence[int],
    failures: Sequence[float] | None = None,
) -> Evaluation:
    """Reactive HARQ with ``schedule[i]`` RV-equivalents in transmission ``i``.

    ``failures[i]`` is the conditional failure probability of transmission
    ``i`` given that all earlier ones failed; it is derived from the
    scenario's error profile when omitted. The expected count weights each
    transmission by the probability that it happens at all.
    """
    sizes = []
    for s in schedule:
        if isinstance(s, bool) or int(s) != s or s < 1:
            raise ConfigurationError(f"transmission sizes must be integers >= 1, got {s!r}")
        sizes.append(int(s))
    if not sizes:
        raise ConfigurationError("schedule is empty")
    m = len(sizes) - 1
    used = sum(sizes) + m * scenario.feedback_delay
    if used > scenario.delay_budget:
        raise ConstraintError(
            f"schedule {tuple(sizes)} needs {used} slots, delay budget is {scenario.delay_budget}"
        )
    if failures is None:
        failures = reactive_failures(scenario.profile, sizes)
    failures = [_probability(f, "failure probability") for f in failures]
    if len(failures) != len(sizes):
        raise ConfigurationError("need one failure probability per transmission")

    pmf = [0.0] * (max(scenario.n, sum(sizes)) + 1)
    occurs = 1.0  # probability that transmission i is needed at all
    expected = 0.0
    cum = 0
    for i, (size, f) in enumerate(zip(sizes, failures)):
        expected += occurs * size
        cum += size
        if i < m:
            pmf[cum] += occurs * (1.0 - f)
            occurs = occurs * f
    pmf[cum] += occurs
    bler = occurs * failures[-1]
    return _evaluation(pmf, bler, scenario, expected=expected)
