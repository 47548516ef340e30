"""Deterministic discrete-event simulation of the two serving paths.

Path DIRECT: each admitted request occupies one of ``concurrency`` servers
for a normally distributed service time.  Path BATCHED: admitted requests
accumulate until the batch is full or the oldest member has waited the
batching window, then the whole batch executes with an affine service-time
and energy model.  Skipped requests complete instantly through the
fallback.  Identical (config, seed) produces an identical trace.
"""

from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass, field, replace
from enum import IntEnum
from typing import Optional

import numpy as np

from .controller import ControllerConfig, ServicePath
from .energy import (
    DEFAULT_EWMA_LAMBDA,
    DEFAULT_GRID_INTENSITY,
    EnergyLedger,
)
from .errors import ConfigError
from .telemetry import percentile_nearest_rank
from .workload import ArrivalMode, RequestFeatures, WorkloadConfig, generate_requests

# Slack for float comparisons on event timestamps (seconds).
_TIME_EPS = 1e-12


@dataclass(frozen=True)
class PathAConfig:
    """Direct execution: per-request service time and active energy."""

    latency_mean_ms: float = 5.0
    latency_std_ms: float = 0.0
    active_energy_j_per_req: float = 0.0

    def __post_init__(self) -> None:
        if self.latency_mean_ms <= 0.0:
            raise ConfigError(f"path_a.latency_mean_ms must be > 0, got {self.latency_mean_ms}")
        if self.latency_std_ms < 0.0:
            raise ConfigError(f"path_a.latency_std_ms must be >= 0, got {self.latency_std_ms}")
        if self.active_energy_j_per_req < 0.0:
            raise ConfigError("path_a.active_energy_j_per_req must be >= 0")


@dataclass(frozen=True)
class PathBConfig:
    """Dynamic batching: size/window triggers and affine batch cost."""

    max_batch_size: int = 8
    batching_window_ms: float = 10.0
    batch_base_ms: float = 5.0
    per_item_ms: float = 1.0
    batch_base_energy_j: float = 0.0
    per_item_energy_j: float = 0.0

    def __post_init__(self) -> None:
        if self.max_batch_size < 1:
            raise ConfigError(f"path_b.max_batch_size must be >= 1, got {self.max_batch_size}")
        if self.batching_window_ms <= 0.0:
            raise ConfigError("path_b.batching_window_ms must be > 0")
        for name in ("batch_base_ms", "per_item_ms", "batch_base_energy_j", "per_item_energy_j"):
            if getattr(self, name) < 0.0:
                raise ConfigError(f"path_b.{name} must be >= 0")


@dataclass(frozen=True)
class SimConfig:
    seed: int = 0
    horizon_s: float = 10.0
    concurrency: int = 10
    baseline_power_w: float = 0.0
    p95_window: int = 100
    ewma_lambda: float = DEFAULT_EWMA_LAMBDA
    grid_intensity_kg_per_kwh: float = DEFAULT_GRID_INTENSITY
    path_a: PathAConfig = field(default_factory=PathAConfig)
    path_b: PathBConfig = field(default_factory=PathBConfig)
    controller: ControllerConfig = field(default_factory=ControllerConfig)
    workload: WorkloadConfig = field(default_factory=WorkloadConfig)

    def __post_init__(self) -> None:
        if self.horizon_s <= 0.0:
            raise ConfigError(f"horizon_s must be > 0, got {self.horizon_s}")
        if self.concurrency < 1:
            raise ConfigError(f"concurrency must be >= 1, got {self.concurrency}")
        if self.baseline_power_w < 0.0:
            raise ConfigError(f"baseline_power_w must be >= 0, got {self.baseline_power_w}")
        if self.p95_window < 1:
            raise ConfigError(f"p95_window must be >= 1, got {self.p95_window}")


@dataclass(frozen=True)
class CompletionRecord:
    request_id: int
    admitted: bool
    path: str                 # "DIRECT" | "BATCHED" | "NONE"
    enqueue_t: float
    start_t: float
    finish_t: float
    latency_ms: float
    joules: float
    predicted_label: int
    correct: bool


@dataclass(frozen=True)
class CongestionSnapshot:
    """Raw congestion signals at one instant."""

    queue_depth: int
    p95_latency_ms: float
    batch_fill: float         # pending in current batch / max_batch_size


@dataclass
class RunTrace:
    """Everything one simulation produced, in completion order."""

    records: list[CompletionRecord]
    makespan_s: float
    ledger: EnergyLedger
    admitted: int
    skipped: int

    @property
    def arrivals(self) -> int:
        return len(self.records)


def sample_service_latency(path_a: PathAConfig, rng: np.random.Generator) -> float:
    """One direct-path service time in ms, floored at 0.1 ms."""
    return max(0.1, float(rng.normal(path_a.latency_mean_ms, path_a.latency_std_ms)))


@dataclass(frozen=True)
class _Pending:
    enqueue_t: float
    req: RequestFeatures


def batch_flush_policy(pending: list[_Pending], now: float,
                       path_b: PathBConfig) -> Optional[list[_Pending]]:
    """Members to flush now, or None while neither trigger has fired.

    Triggers: the batch is full, or the oldest member has waited the
    batching window.
    """
    if not pending:
        return None
    if len(pending) >= path_b.max_batch_size:
        return pending[: path_b.max_batch_size]
    window_s = path_b.batching_window_ms / 1000.0
    if now - pending[0].enqueue_t >= window_s - _TIME_EPS:
        return list(pending)
    return None


class _Ev(IntEnum):
    ARRIVAL = 0
    DIRECT_DONE = 1
    BATCH_TIMER = 2
    BATCH_DONE = 3


class Simulation:
    """One seeded run.  Single-threaded: the event loop owns all state."""

    def __init__(self, config: SimConfig) -> None:
        self.config = config
        seeds = np.random.SeedSequence(config.seed).spawn(3)
        self._wl_rng = np.random.default_rng(seeds[0])
        self._svc_rng = np.random.default_rng(seeds[1])
        self._fb_rng = np.random.default_rng(seeds[2])
        self.ledger = EnergyLedger(
            grid_intensity=config.grid_intensity_kg_per_kwh,
            ewma_lambda=config.ewma_lambda,
        )
        self.controller = None
        if config.controller.enabled:
            self.controller = config.controller.build(
                self.ledger, self.snapshot_congestion,
                p95_window=config.p95_window, t_origin=0.0,
            )
        self._window_s = config.path_b.batching_window_ms / 1000.0
        self._latency_window: deque[float] = deque(maxlen=config.p95_window)
        self._events: list[tuple[float, int, int, object]] = []
        self._seq = 0
        self._records: list[CompletionRecord] = []
        self._direct_wait: deque[tuple[RequestFeatures, float]] = deque()
        self._free_servers = config.concurrency
        self._pending: list[_Pending] = []
        self._batch_epoch = 0
        # closed-loop bookkeeping
        self._closed = config.workload.mode is ArrivalMode.CLOSED
        self._features: list[RequestFeatures] = []
        self._released = 0
        self._free_slots = config.concurrency

    # -- congestion signals -------------------------------------------------

    def queue_depth(self) -> int:
        return len(self._direct_wait) + len(self._pending)

    def snapshot_congestion(self) -> CongestionSnapshot:
        if self._latency_window:
            p95 = percentile_nearest_rank(list(self._latency_window), 95.0)
        else:
            p95 = 0.0
        return CongestionSnapshot(
            queue_depth=self.queue_depth(),
            p95_latency_ms=p95,
            batch_fill=len(self._pending) / self.config.path_b.max_batch_size,
        )

    # -- event plumbing -----------------------------------------------------

    def _schedule(self, t: float, kind: _Ev, payload: object) -> None:
        heapq.heappush(self._events, (t, self._seq, int(kind), payload))
        self._seq += 1

    # -- admission ----------------------------------------------------------

    def _decide(self, req: RequestFeatures, now: float) -> tuple[bool, ServicePath]:
        if self.controller is None:
            # open-loop policy: admit everything, route statically
            cc = self.config.controller
            if cc.routing.name == "ALL_BATCHED":
                return True, ServicePath.BATCHED
            if cc.routing.name == "THRESHOLD_ON_QUEUE":
                if self.queue_depth() > cc.queue_threshold:
                    return True, ServicePath.BATCHED
                return True, ServicePath.DIRECT
            return True, ServicePath.DIRECT
        decision = self.controller.decide(req, now)
        return decision.admit, decision.path

    # -- completions --------------------------------------------------------

    def _complete(self, req: RequestFeatures, path: ServicePath, enqueue_t: float,
                  start_t: float, finish_t: float, joules: float, admitted: bool) -> None:
        predicted = req.top_class()
        if admitted:
            correct = predicted == req.true_label
        else:
            # fallback answer: argmax, degraded by one extra error coin
            correct = (predicted == req.true_label and
                       float(self._fb_rng.random()) >= self.config.workload.fallback_degradation)
        self._records.append(CompletionRecord(
            request_id=req.id,
            admitted=admitted,
            path=path.value,
            enqueue_t=enqueue_t,
            start_t=start_t,
            finish_t=finish_t,
            latency_ms=(finish_t - enqueue_t) * 1000.0,
            joules=joules if admitted else 0.0,
            predicted_label=predicted,
            correct=correct,
        ))
        if admitted:
            latency_ms = (finish_t - enqueue_t) * 1000.0
            self._latency_window.append(latency_ms)
            if self.controller is not None:
                self.controller.record_outcome(latency_ms, joules, self.queue_depth())
            else:
                self.ledger.observe_request(joules)

    def _complete_fallback(self, req: RequestFeatures, now: float) -> None:
        self._complete(req, ServicePath.NONE, now, now, now, 0.0, admitted=False)

    # -- direct path ----------------------------------------------------------

    def _start_direct(self, req: RequestFeatures, enqueue_t: float, now: float) -> None:
        service_s = sample_service_latency(self.config.path_a, self._svc_rng) / 1000.0
        self._schedule(now + service_s, _Ev.DIRECT_DONE, (req, enqueue_t, now))

    # -- batched path ---------------------------------------------------------

    def _enqueue_batch(self, req: RequestFeatures, now: float) -> None:
        first = not self._pending
        self._pending.append(_Pending(now, req))
        if not self._maybe_flush(now) and first:
            self._schedule(now + self._window_s, _Ev.BATCH_TIMER, self._batch_epoch)

    def _maybe_flush(self, now: float) -> bool:
        batch = batch_flush_policy(self._pending, now, self.config.path_b)
        if batch is None:
            return False
        del self._pending[: len(batch)]
        self._batch_epoch += 1
        if self._pending:
            self._schedule(self._pending[0].enqueue_t + self._window_s,
                           _Ev.BATCH_TIMER, self._batch_epoch)
        n = len(batch)
        pb = self.config.path_b
        service_s = (pb.batch_base_ms + pb.per_item_ms * n) / 1000.0
        joules_each = (pb.batch_base_energy_j + pb.per_item_energy_j * n) / n
        self._schedule(now + service_s, _Ev.BATCH_DONE, (now, batch, joules_each))
        return True

    # -- closed-loop release --------------------------------------------------

    def _release(self, now: float) -> None:
        while self._free_slots > 0 and self._released < len(self._features):
            base = self._features[self._released]
            self._released += 1
            req = replace(base, arrival_t=now)
            admitted, path = self._decide(req, now)
            if not admitted:
                self._complete_fallback(req, now)
                continue  # slot stays free; the client retries immediately
            self._free_slots -= 1
            if path is ServicePath.DIRECT:
                self._start_direct(req, enqueue_t=now, now=now)
            else:
                self._enqueue_batch(req, now)

    # -- event handlers ---------------------------------------------------------

    def _on_arrival(self, req: RequestFeatures, now: float) -> None:
        admitted, path = self._decide(req, now)
        if not admitted:
            self._complete_fallback(req, now)
        elif path is ServicePath.DIRECT:
            if self._free_servers > 0:
                self._free_servers -= 1
                self._start_direct(req, enqueue_t=now, now=now)
            else:
                self._direct_wait.append((req, now))
        else:
            self._enqueue_batch(req, now)

    def _on_direct_done(self, payload: tuple, now: float) -> None:
        req, enqueue_t, start_t = payload
        self._complete(req, ServicePath.DIRECT, enqueue_t, start_t, now,
                       self.config.path_a.active_energy_j_per_req, admitted=True)
        if self._closed:
            self._free_slots += 1
            self._release(now)
        elif self._direct_wait:
            nxt, enq = self._direct_wait.popleft()
            self._start_direct(nxt, enqueue_t=enq, now=now)
        else:
            self._free_servers += 1

    def _on_batch_timer(self, epoch: int, now: float) -> None:
        if epoch != self._batch_epoch:
            return  # the batch this timer guarded already flushed
        if not self._maybe_flush(now) and self._pending:
            self._schedule(self._pending[0].enqueue_t + self._window_s,
                           _Ev.BATCH_TIMER, self._batch_epoch)

    def _on_batch_done(self, payload: tuple, now: float) -> None:
        start_t, batch, joules_each = payload
        for pend in batch:
            self._complete(pend.req, ServicePath.BATCHED, pend.enqueue_t,
                           start_t, now, joules_each, admitted=True)
        if self._closed:
            self._free_slots += len(batch)
            self._release(now)

    # -- main loop ----------------------------------------------------------

    def run(self) -> RunTrace:
        cfg = self.config
        if self._closed:
            self._features = generate_requests(cfg.workload, cfg.horizon_s, self._wl_rng)
            self._release(0.0)
        else:
            for req in generate_requests(cfg.workload, cfg.horizon_s, self._wl_rng):
                self._schedule(req.arrival_t, _Ev.ARRIVAL, req)
        while self._events:
            t, _, kind, payload = heapq.heappop(self._events)
            if kind == _Ev.ARRIVAL:
                self._on_arrival(payload, t)
            elif kind == _Ev.DIRECT_DONE:
                self._on_direct_done(payload, t)
            elif kind == _Ev.BATCH_TIMER:
                self._on_batch_timer(payload, t)
            else:
                self._on_batch_done(payload, t)
        self.ledger.accumulate(cfg.baseline_power_w, cfg.horizon_s)
        if self._records:
            makespan = (max(r.finish_t for r in self._records)
                        - min(r.enqueue_t for r in self._records))
        else:
            makespan = 0.0
        admitted = sum(1 for r in self._records if r.admitted)
        return RunTrace(
            records=self._records,
            makespan_s=makespan,
            ledger=self.ledger,
            admitted=admitted,
            skipped=len(self._records) - admitted,
        )


def run(config: SimConfig) -> RunTrace:
    """Simulate one run of ``config`` from its seed."""
    return Simulation(config).run()
