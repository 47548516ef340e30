"""Closed-loop admission controller.

Each request gets a composite cost J = alpha*utility + beta*energy +
gamma*congestion, built from three proxies normalized to [0, 1]:

* utility     — how much the answer is worth: normalized score entropy,
                or one minus the top score;
* energy      — the rolling joules-per-request EWMA from the energy
                ledger, min-max normalized over the run;
* congestion  — mean of normalized queue depth, normalized recent P95
                latency, and current batch fill.

J is compared against a threshold that relaxes exponentially from a
startup value toward a steady-state value.  The comparison direction is
configurable: GEQ admits when J >= threshold (ties admit); LT admits when
J < threshold.  Skipped requests are answered from the zero-cost fallback
(argmax of the provided scores) and generate no backend work.
"""

from __future__ import annotations

import math
import warnings
from collections import deque
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Sequence, TYPE_CHECKING

from .energy import EnergyLedger
from .errors import InvalidDistribution, InvalidSchedule
from .telemetry import percentile_nearest_rank

if TYPE_CHECKING:  # pragma: no cover
    from .servesim import CongestionSnapshot
    from .workload import RequestFeatures


class Direction(Enum):
    """Which side of the threshold admits."""

    GEQ = "GEQ"  # admit iff J >= threshold (ties admit)
    LT = "LT"    # admit iff J < threshold

    def admits(self, composite: float, threshold: float) -> bool:
        if self is Direction.GEQ:
            return composite >= threshold
        return composite < threshold


class UtilityProxy(Enum):
    ENTROPY = "ENTROPY"
    ONE_MINUS_CONFIDENCE = "ONE_MINUS_CONFIDENCE"


class RoutePolicy(Enum):
    ALL_DIRECT = "ALL_DIRECT"
    ALL_BATCHED = "ALL_BATCHED"
    THRESHOLD_ON_QUEUE = "THRESHOLD_ON_QUEUE"


class ServicePath(Enum):
    DIRECT = "DIRECT"
    BATCHED = "BATCHED"
    NONE = "NONE"


class Reason(Enum):
    ADMITTED = "ADMITTED"
    BELOW_THRESHOLD = "BELOW_THRESHOLD"
    ABOVE_THRESHOLD = "ABOVE_THRESHOLD"


@dataclass(frozen=True)
class CostWeights:
    """Policy knobs for the three cost components.

    Signs are unrestricted: under GEQ, a reward needs a positive weight
    and a penalty a negative one.
    """

    alpha: float
    beta: float
    gamma: float

    def __post_init__(self) -> None:
        for name in ("alpha", "beta", "gamma"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"weight {name} must be finite")


@dataclass(frozen=True)
class ThresholdSchedule:
    """Exponential relaxation from ``tau0`` at ``t_origin`` toward ``tau_inf``."""

    tau0: float
    tau_inf: float
    k: float          # 1/seconds, must be > 0
    t_origin: float = 0.0

    def __post_init__(self) -> None:
        fields = (self.tau0, self.tau_inf, self.k, self.t_origin)
        if not all(math.isfinite(v) for v in fields):
            raise InvalidSchedule(f"schedule fields must be finite, got {self}")
        if self.k <= 0.0:
            raise InvalidSchedule(f"decay rate k must be > 0, got {self.k!r}")
        if self.tau0 < self.tau_inf:
            warnings.warn(
                "threshold schedule rises over time (tau0 < tau_inf); "
                "decay-from-permissive runs expect tau0 >= tau_inf",
                stacklevel=2,
            )


def threshold_at(schedule: ThresholdSchedule, t: float) -> float:
    """Threshold value at time ``t``.

    Times before ``t_origin`` are clamped to the origin, so the value is
    always between tau0 and tau_inf.
    """
    if not (math.isfinite(schedule.k) and schedule.k > 0.0):
        raise InvalidSchedule(f"decay rate k must be > 0, got {schedule.k!r}")
    elapsed = max(0.0, t - schedule.t_origin)
    return schedule.tau_inf + (schedule.tau0 - schedule.tau_inf) * math.exp(-schedule.k * elapsed)


def _validate_distribution(scores: Sequence[float]) -> list[float]:
    xs = [float(s) for s in scores]
    if len(xs) < 2:
        raise InvalidDistribution(f"need at least 2 class scores, got {len(xs)}")
    if any(not math.isfinite(x) or x < 0.0 for x in xs):
        raise InvalidDistribution(f"scores must be finite and >= 0: {xs}")
    total = sum(xs)
    if abs(total - 1.0) > 1e-9:
        raise InvalidDistribution(f"scores must sum to 1 (got {total!r})")
    return xs


def entropy_utility(scores: Sequence[float]) -> float:
    """Shannon entropy of the scores normalized by log(K), in [0, 1]."""
    xs = _validate_distribution(scores)
    h = -sum(p * math.log(p) for p in xs if p > 0.0)
    return min(1.0, max(0.0, h / math.log(len(xs))))


def one_minus_confidence_utility(scores: Sequence[float]) -> float:
    """1 - max score: zero when the prediction is already certain."""
    xs = _validate_distribution(scores)
    return 1.0 - max(xs)


_UTILITY_FN = {
    UtilityProxy.ENTROPY: entropy_utility,
    UtilityProxy.ONE_MINUS_CONFIDENCE: one_minus_confidence_utility,
}


@dataclass
class NormalizerChannel:
    """Running min-max scaler for one raw proxy channel."""

    running_min: float | None = None
    running_max: float | None = None

    def observe(self, raw: float) -> None:
        if self.running_min is None or raw < self.running_min:
            self.running_min = raw
        if self.running_max is None or raw > self.running_max:
            self.running_max = raw

    def normalize(self, raw: float) -> float:
        """Fold ``raw`` into the running range, then scale it to [0, 1].

        A degenerate channel (min == max, e.g. before two distinct samples)
        normalizes to 0.
        """
        self.observe(raw)
        lo, hi = self.running_min, self.running_max
        if hi <= lo:
            return 0.0
        return min(1.0, max(0.0, (raw - lo) / (hi - lo)))

    def copy(self) -> "NormalizerChannel":
        return NormalizerChannel(self.running_min, self.running_max)


@dataclass
class NormalizerState:
    """One channel per raw proxy feeding the cost functional."""

    energy: NormalizerChannel = field(default_factory=NormalizerChannel)
    queue_depth: NormalizerChannel = field(default_factory=NormalizerChannel)
    p95_ms: NormalizerChannel = field(default_factory=NormalizerChannel)


@dataclass(frozen=True)
class CostBreakdown:
    """The components behind one decision, all on comparable scales."""

    utility: float
    energy: float
    congestion: float
    composite: float
    threshold: float


@dataclass(frozen=True)
class AdmissionDecision:
    admit: bool
    path: ServicePath
    breakdown: CostBreakdown
    reason: Reason


def cost(weights: CostWeights, utility: float, energy: float, congestion: float) -> float:
    """Weighted composite cost, exactly as weighted (no re-scaling)."""
    return weights.alpha * utility + weights.beta * energy + weights.gamma * congestion


@dataclass(frozen=True)
class ControllerConfig:
    """Declarative controller settings, as they appear in run configs."""

    enabled: bool = True
    alpha: float = 1.0
    beta: float = 0.0
    gamma: float = 0.0
    tau0: float = 1.0
    tau_inf: float = 0.2
    k: float = 0.5
    direction: Direction = Direction.GEQ
    utility_proxy: UtilityProxy = UtilityProxy.ENTROPY
    routing: RoutePolicy = RoutePolicy.ALL_DIRECT
    queue_threshold: int = 4

    def build(
        self,
        ledger: EnergyLedger | None = None,
        congestion_source: "Callable[[], CongestionSnapshot] | None" = None,
        *,
        p95_window: int = 100,
        t_origin: float = 0.0,
    ) -> "AdmissionController":
        return AdmissionController(
            CostWeights(self.alpha, self.beta, self.gamma),
            ThresholdSchedule(self.tau0, self.tau_inf, self.k, t_origin),
            ledger if ledger is not None else EnergyLedger(),
            congestion_source,
            direction=self.direction,
            utility_proxy=self.utility_proxy,
            routing=self.routing,
            queue_threshold=self.queue_threshold,
            p95_window=p95_window,
        )


class AdmissionController:
    """Per-request admit/skip policy driven by measured outcomes.

    All mutations (decide, record_outcome) must be serialized by the
    caller; the object holds no lock of its own.
    """

    def __init__(
        self,
        weights: CostWeights,
        schedule: ThresholdSchedule,
        ledger: EnergyLedger,
        congestion_source: "Callable[[], CongestionSnapshot] | None" = None,
        *,
        direction: Direction = Direction.GEQ,
        utility_proxy: UtilityProxy = UtilityProxy.ENTROPY,
        routing: RoutePolicy = RoutePolicy.ALL_DIRECT,
        queue_threshold: int = 4,
        p95_window: int = 100,
    ) -> None:
        self.weights = weights
        self.schedule = schedule
        self.ledger = ledger
        self.congestion_source = congestion_source
        self.direction = direction
        self.utility_proxy = utility_proxy
        self.routing = routing
        self.queue_threshold = queue_threshold
        self.normalizers = NormalizerState()
        self._latencies: deque[float] = deque(maxlen=p95_window)
        self.admitted_total = 0
        self.skipped_total = 0

    def p95_ms(self) -> float:
        """Nearest-rank P95 over the recent served-latency window; 0 when empty."""
        if not self._latencies:
            return 0.0
        return percentile_nearest_rank(list(self._latencies), 95.0)

    def _congestion_snapshot(self) -> "CongestionSnapshot":
        from .servesim import CongestionSnapshot

        if self.congestion_source is not None:
            return self.congestion_source()
        return CongestionSnapshot(queue_depth=0, p95_latency_ms=self.p95_ms(), batch_fill=0.0)

    def _route(self, queue_depth: int) -> ServicePath:
        if self.routing is RoutePolicy.ALL_BATCHED:
            return ServicePath.BATCHED
        if self.routing is RoutePolicy.THRESHOLD_ON_QUEUE:
            return ServicePath.BATCHED if queue_depth > self.queue_threshold else ServicePath.DIRECT
        return ServicePath.DIRECT

    def decide(self, features: "RequestFeatures", now: float) -> AdmissionDecision:
        """Admit or skip one request at time ``now``.

        Deterministic given the current state snapshot; advances the
        normalizer ranges as a side effect.
        """
        utility = _UTILITY_FN[self.utility_proxy](features.scores)
        if self.ledger.samples_seen > 0:
            energy = self.normalizers.energy.normalize(self.ledger.ewma_joules_per_request)
        else:
            energy = 0.0  # no outcome seen yet: degenerate-channel rule
        snap = self._congestion_snapshot()
        congestion = (
            self.normalizers.queue_depth.normalize(float(snap.queue_depth))
            + self.normalizers.p95_ms.normalize(snap.p95_latency_ms)
            + snap.batch_fill
        ) / 3.0
        composite = cost(self.weights, utility, energy, congestion)
        threshold = threshold_at(self.schedule, now)
        admit = self.direction.admits(composite, threshold)
        if admit:
            reason = Reason.ADMITTED
            path = self._route(snap.queue_depth)
            self.admitted_total += 1
        else:
            reason = (Reason.BELOW_THRESHOLD if self.direction is Direction.GEQ
                      else Reason.ABOVE_THRESHOLD)
            path = ServicePath.NONE
            self.skipped_total += 1
        return AdmissionDecision(
            admit=admit,
            path=path,
            breakdown=CostBreakdown(utility, energy, congestion, composite, threshold),
            reason=reason,
        )

    def record_outcome(self, latency_ms: float, joules: float, queue_depth: int) -> None:
        """Feed one served request's measurements back into the loop."""
        if latency_ms < 0.0 or joules < 0.0 or queue_depth < 0:
            from .errors import NegativeMeasurement

            raise NegativeMeasurement(
                f"outcome measurements must be >= 0, got "
                f"latency={latency_ms!r} joules={joules!r} depth={queue_depth!r}"
            )
        self.ledger.observe_request(joules)
        self._latencies.append(latency_ms)
        self.normalizers.energy.observe(self.ledger.ewma_joules_per_request)
        self.normalizers.queue_depth.observe(float(queue_depth))
        self.normalizers.p95_ms.observe(self.p95_ms())

    def reset_clock(self, t_origin: float) -> None:
        """Re-arm the threshold decay to start at ``t_origin``."""
        self.schedule = replace(self.schedule, t_origin=t_origin)
