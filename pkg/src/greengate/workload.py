"""Seeded synthetic request generation.

Arrival processes (Poisson, on/off bursts, or closed-loop release) and a
calibrated score model: each request draws a confidence c, puts c on a
uniformly chosen top class, and makes the top class the true label with
probability exactly c.  Predicting the argmax is then correct with
probability c, so dataset accuracy is a config knob rather than a model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigError


class ArrivalMode(Enum):
    POISSON = "POISSON"
    ONOFF = "ONOFF"
    # Closed loop: a fixed number of requests issued by `concurrency`
    # clients, each sending its next request when the previous completes.
    CLOSED = "CLOSED"


@dataclass(frozen=True)
class RequestFeatures:
    """One inference request as the controller sees it.

    ``true_label`` is the synthetic ground truth; None for live traffic
    where no label exists (the decision gateway).
    """

    id: int
    arrival_t: float
    scores: tuple[float, ...]
    true_label: int | None = None

    def top_class(self) -> int:
        return max(range(len(self.scores)), key=self.scores.__getitem__)


@dataclass(frozen=True)
class WorkloadConfig:
    mode: ArrivalMode = ArrivalMode.POISSON
    rate_rps: float = 50.0
    on_rate_rps: float = 100.0
    off_rate_rps: float = 10.0
    phase_mean_s: float = 1.0
    num_requests: int = 100          # CLOSED mode only
    num_classes: int = 2
    confidence_low: float = 0.85
    confidence_high: float = 0.97
    # Skipped requests answer from the fallback; their argmax answer is
    # degraded from P(correct)=c to c*(1-fallback_degradation).
    fallback_degradation: float = 0.05
    seed: int | None = None          # standalone use; simulations seed externally

    def __post_init__(self) -> None:
        if self.num_classes < 2:
            raise ConfigError(f"num_classes must be >= 2, got {self.num_classes}")
        lo, hi = self.confidence_low, self.confidence_high
        if not (0.0 < lo <= hi <= 1.0):
            raise ConfigError(f"need 0 < confidence_low <= confidence_high <= 1, got {lo}, {hi}")
        if lo < 1.0 / self.num_classes:
            raise ConfigError(
                f"confidence_low {lo} below uniform score 1/{self.num_classes}"
            )
        if not 0.0 <= self.fallback_degradation <= 1.0:
            raise ConfigError(
                f"fallback_degradation must be in [0, 1], got {self.fallback_degradation}"
            )
        if self.mode is ArrivalMode.CLOSED and self.num_requests < 1:
            raise ConfigError(f"num_requests must be >= 1, got {self.num_requests}")
        if self.mode is ArrivalMode.POISSON and self.rate_rps <= 0.0:
            raise ConfigError(f"rate_rps must be > 0, got {self.rate_rps}")
        if self.mode is ArrivalMode.ONOFF:
            if self.on_rate_rps < 0.0 or self.off_rate_rps < 0.0:
                raise ConfigError("on/off rates must be >= 0")
            if self.phase_mean_s <= 0.0:
                raise ConfigError(f"phase_mean_s must be > 0, got {self.phase_mean_s}")


def poisson_arrivals(rate_rps: float, horizon_s: float, rng: np.random.Generator) -> list[float]:
    """Arrival times of a Poisson process at ``rate_rps`` over ``[0, horizon_s)``."""
    if rate_rps <= 0.0:
        raise ConfigError(f"rate must be > 0, got {rate_rps}")
    times: list[float] = []
    t = 0.0
    mean_gap = 1.0 / rate_rps
    while True:
        t += float(rng.exponential(mean_gap))
        if t >= horizon_s:
            return times
        times.append(t)


def onoff_phases(config: WorkloadConfig, horizon_s: float,
                 rng: np.random.Generator) -> list[tuple[float, float, float]]:
    """Alternating (start, end, rate) phases covering ``[0, horizon_s)``.

    Starts in the ON phase; phase lengths are exponential with mean
    ``phase_mean_s``.  Drawn before any arrivals so callers can replay the
    schedule from the same seed.
    """
    phases: list[tuple[float, float, float]] = []
    t = 0.0
    on = True
    while t < horizon_s:
        length = float(rng.exponential(config.phase_mean_s))
        end = min(t + length, horizon_s)
        phases.append((t, end, config.on_rate_rps if on else config.off_rate_rps))
        t += length
        on = not on
    return phases


def onoff_arrivals(config: WorkloadConfig, horizon_s: float,
                   rng: np.random.Generator) -> list[float]:
    """Bursty arrivals: Poisson at on_rate during ON phases, off_rate otherwise."""
    times: list[float] = []
    for start, end, rate in onoff_phases(config, horizon_s, rng):
        if rate <= 0.0:
            continue
        t = start
        mean_gap = 1.0 / rate
        while True:
            t += float(rng.exponential(mean_gap))
            if t >= end:
                break
            times.append(t)
    return times


def synth_request(req_id: int, arrival_t: float, config: WorkloadConfig,
                  rng: np.random.Generator) -> RequestFeatures:
    """Draw one request: confidence c on a random top class, rest uniform.

    The true label equals the top class with probability exactly c,
    otherwise it is uniform over the remaining classes.
    """
    k = config.num_classes
    c = float(rng.uniform(config.confidence_low, config.confidence_high))
    top = int(rng.integers(k))
    rest = (1.0 - c) / (k - 1)
    scores = tuple(c if i == top else rest for i in range(k))
    if float(rng.random()) < c:
        label = top
    else:
        other = int(rng.integers(k - 1))
        label = other if other < top else other + 1
    return RequestFeatures(id=req_id, arrival_t=arrival_t, scores=scores, true_label=label)


def generate_requests(config: WorkloadConfig, horizon_s: float,
                      rng: np.random.Generator) -> list[RequestFeatures]:
    """Arrival times plus synthetic features for one run.

    CLOSED mode has no exogenous arrival times: features are generated for
    ``num_requests`` ids with arrival_t = NaN, to be stamped at release.
    """
    if config.mode is ArrivalMode.CLOSED:
        return [synth_request(i, math.nan, config, rng) for i in range(config.num_requests)]
    if config.mode is ArrivalMode.POISSON:
        times = poisson_arrivals(config.rate_rps, horizon_s, rng)
    else:
        times = onoff_arrivals(config, horizon_s, rng)
    return [synth_request(i, t, config, rng) for i, t in enumerate(times)]
