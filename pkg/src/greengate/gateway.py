"""HTTP decision gateway.

Exposes the admission controller to external serving stacks over plain
HTTP/1.1 + JSON.  The gateway decides; it never executes inference.  All
controller mutations serialize through one lock, so concurrent clients get
consistent counters and normalizer state.

Endpoints:
    POST /v1/decide   admit-or-skip decision for one request
    POST /v1/outcome  feed back measured latency/joules for a served request
    GET  /v1/state    JSON snapshot of the loop state
    GET  /v1/metrics  plain-text counter lines (``greengate_admitted_total 42``)
    POST /v1/reset    re-arm the threshold decay clock to "now"
"""

from __future__ import annotations

import json
import logging
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Any

from .controller import AdmissionController, ControllerConfig, threshold_at
from .energy import DEFAULT_EWMA_LAMBDA, EnergyLedger
from .errors import InvalidDistribution, NegativeMeasurement
from .servesim import CongestionSnapshot
from .workload import RequestFeatures

log = logging.getLogger("greengate.gateway")


class GatewayState:
    """Shared mutable state behind the HTTP handlers.

    ``queue_depth`` is whatever the callers last reported; the gateway has
    no queue of its own.
    """

    def __init__(
        self,
        config: ControllerConfig | None,
        *,
        ewma_lambda: float = DEFAULT_EWMA_LAMBDA,
        clock=time.monotonic,
    ) -> None:
        self.lock = threading.Lock()
        self.clock = clock
        self.queue_depth = 0
        self.controller: AdmissionController | None = None
        if config is not None:
            ledger = EnergyLedger(ewma_lambda=ewma_lambda)
            self.controller = config.build(
                ledger, self._congestion, t_origin=clock()
            )

    def _congestion(self) -> CongestionSnapshot:
        assert self.controller is not None
        return CongestionSnapshot(
            queue_depth=self.queue_depth,
            p95_latency_ms=self.controller.p95_ms(),
            batch_fill=0.0,
        )

    def snapshot(self) -> dict[str, Any]:
        with self.lock:
            c = self.controller
            if c is None:
                return {
                    "tau_now": 0.0,
                    "ewma_j_per_req": 0.0,
                    "p95_ms": 0.0,
                    "queue_depth": self.queue_depth,
                    "admitted_total": 0,
                    "skipped_total": 0,
                }
            return {
                "tau_now": threshold_at(c.schedule, self.clock()),
                "ewma_j_per_req": c.ledger.ewma_joules_per_request,
                "p95_ms": c.p95_ms(),
                "queue_depth": self.queue_depth,
                "admitted_total": c.admitted_total,
                "skipped_total": c.skipped_total,
            }


class _ApiError(Exception):
    def __init__(self, status: int, message: str) -> None:
        super().__init__(message)
        self.status = status
        self.message = message


def _require(body: Any) -> dict[str, Any]:
    if not isinstance(body, dict):
        raise _ApiError(422, "body must be a JSON object")
    return body


def _field(body: dict[str, Any], name: str, kinds: tuple[type, ...], required: bool = True):
    if name not in body:
        if required:
            raise _ApiError(422, f"missing field {name!r}")
        return None
    value = body[name]
    if isinstance(value, bool) or not isinstance(value, kinds):
        raise _ApiError(422, f"field {name!r} has wrong type")
    return value


class GatewayHandler(BaseHTTPRequestHandler):
    server_version = "greengate"
    protocol_version = "HTTP/1.1"

    # -- plumbing ---------------------------------------------------------

    @property
    def state(self) -> GatewayState:
        return self.server.state  # type: ignore[attr-defined]

    def log_message(self, format: str, *args) -> None:  # noqa: A002
        log.debug("%s %s", self.address_string(), format % args)

    def _send_json(self, status: int, payload: dict[str, Any]) -> None:
        raw = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(raw)))
        self.end_headers()
        self.wfile.write(raw)

    def _send_text(self, status: int, text: str) -> None:
        raw = text.encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "text/plain; charset=utf-8")
        self.send_header("Content-Length", str(len(raw)))
        self.end_headers()
        self.wfile.write(raw)

    def _send_empty(self, status: int) -> None:
        self.send_response(status)
        self.send_header("Content-Length", "0")
        self.end_headers()

    def _read_body(self) -> dict[str, Any]:
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b""
        try:
            return _require(json.loads(raw.decode("utf-8")))
        except (ValueError, UnicodeDecodeError):
            raise _ApiError(422, "body is not valid JSON") from None

    # -- endpoints --------------------------------------------------------

    def do_POST(self) -> None:
        try:
            if self.path == "/v1/decide":
                self._send_json(200, self._decide(self._read_body()))
            elif self.path == "/v1/outcome":
                self._outcome(self._read_body())
                self._send_empty(204)
            elif self.path == "/v1/reset":
                self._reset()
                self._send_empty(204)
            else:
                self._send_json(404, {"error": f"no such endpoint {self.path!r}"})
        except _ApiError as exc:
            self._send_json(exc.status, {"error": exc.message})

    def do_GET(self) -> None:
        if self.path == "/v1/state":
            self._send_json(200, self.state.snapshot())
        elif self.path == "/v1/metrics":
            self._send_text(200, self._metrics())
        else:
            self._send_json(404, {"error": f"no such endpoint {self.path!r}"})

    def _decide(self, body: dict[str, Any]) -> dict[str, Any]:
        state = self.state
        if state.controller is None:
            raise _ApiError(503, "controller not configured")
        request_id = _field(body, "id", (str,))
        scores = _field(body, "scores", (list,))
        depth = _field(body, "queue_depth", (int,), required=False)
        timestamp = _field(body, "timestamp_s", (int, float), required=False)
        if not all(isinstance(s, (int, float)) and not isinstance(s, bool) for s in scores):
            raise _ApiError(422, "field 'scores' must be an array of numbers")
        with state.lock:
            controller = state.controller
            if depth is not None:
                state.queue_depth = depth
            now = float(timestamp) if timestamp is not None else state.clock()
            features = RequestFeatures(
                id=0, arrival_t=now, scores=tuple(float(s) for s in scores), true_label=None
            )
            try:
                decision = controller.decide(features, now)
            except InvalidDistribution as exc:
                raise _ApiError(400, str(exc)) from None
        b = decision.breakdown
        log.info(
            "decide id=%s admit=%s j=%.6f tau=%.6f",
            request_id, decision.admit, b.composite, b.threshold,
        )
        return {
            "admit": decision.admit,
            "path": decision.path.name,
            "j": b.composite,
            "tau": b.threshold,
            "l": b.utility,
            "e": b.energy,
            "c": b.congestion,
            "reason": decision.reason.value,
        }

    def _outcome(self, body: dict[str, Any]) -> None:
        state = self.state
        if state.controller is None:
            raise _ApiError(503, "controller not configured")
        _field(body, "id", (str,))
        latency_ms = float(_field(body, "latency_ms", (int, float)))
        joules = float(_field(body, "joules", (int, float)))
        depth = _field(body, "queue_depth", (int,))
        with state.lock:
            try:
                state.controller.record_outcome(latency_ms, joules, depth)
            except NegativeMeasurement as exc:
                raise _ApiError(400, str(exc)) from None
            state.queue_depth = depth

    def _reset(self) -> None:
        state = self.state
        if state.controller is None:
            raise _ApiError(503, "controller not configured")
        with state.lock:
            state.controller.reset_clock(state.clock())

    def _metrics(self) -> str:
        snap = self.state.snapshot()
        return (
            f"greengate_admitted_total {snap['admitted_total']}\n"
            f"greengate_skipped_total {snap['skipped_total']}\n"
            f"greengate_ewma_joules {snap['ewma_j_per_req']!r}\n"
            f"greengate_tau_now {snap['tau_now']!r}\n"
        )


class GatewayServer(ThreadingHTTPServer):
    daemon_threads = True
    # deep accept backlog: many short-lived client connections is the norm
    request_queue_size = 128


def make_server(
    state: GatewayState, bind: str = "127.0.0.1", port: int = 8080
) -> GatewayServer:
    """Bind a threaded HTTP server over ``state``; caller runs serve_forever."""
    server = GatewayServer((bind, port), GatewayHandler)
    server.state = state  # type: ignore[attr-defined]
    return server
