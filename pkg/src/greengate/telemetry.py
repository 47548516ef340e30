"""Percentiles, run summaries, ablation comparison, and file export.

Summary rows follow one fixed CSV schema so that runs, sweeps, and Pareto
frontiers are all directly comparable files.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, Sequence

from .errors import EmptyTrace, MismatchedRun

if TYPE_CHECKING:  # pragma: no cover
    from .energy import EnergyLedger
    from .servesim import RunTrace

CSV_HEADER = [
    "label",
    "avg_latency_ms",
    "std_latency_ms",
    "throughput_rps",
    "energy_kwh",
    "co2_kg",
    "admitted",
    "skipped",
    "accuracy",
]


def percentile_nearest_rank(values: Sequence[float], p: float) -> float:
    """Nearest-rank percentile: the ceil(p/100 * n)-th smallest element.

    No interpolation; the result is always a member of ``values``.
    """
    if len(values) == 0:
        raise EmptyTrace("percentile of empty input")
    if not 0.0 < p <= 100.0:
        raise ValueError(f"p must be in (0, 100], got {p!r}")
    ordered = sorted(values)
    rank = math.ceil(p / 100.0 * len(ordered))
    return ordered[rank - 1]


@dataclass
class SummaryRow:
    """One benchmark line: latency stats, throughput, energy, accuracy."""

    label: str
    avg_latency_ms: float
    std_latency_ms: float
    throughput_rps: float
    energy_kwh: float
    co2_kg: float
    admitted_count: int
    skipped_count: int
    accuracy: float

    @property
    def completed(self) -> int:
        return self.admitted_count + self.skipped_count

    @property
    def total_time_s(self) -> float:
        """Makespan recovered from throughput = completed / makespan."""
        if self.throughput_rps == 0.0 or math.isinf(self.throughput_rps):
            return 0.0
        return self.completed / self.throughput_rps


@dataclass
class AblationReport:
    """Open-loop (admit-all) arm vs controlled arm on one workload."""

    standard: SummaryRow
    controlled: SummaryRow
    total_time_delta_pct: float
    latency_delta_pct: float
    accuracy_delta_pp: float
    admission_rate_pct: float


def summarize(trace: "RunTrace", ledger: "EnergyLedger | None" = None,
              label: str = "run") -> SummaryRow:
    """Aggregate a completion trace into one summary row.

    Latency statistics use the population standard deviation (the run is
    the whole population, not a sample of one).  Skipped requests count as
    completions: they finish through the zero-cost fallback and their
    latency contributes to the average.
    """
    records = trace.records
    if not records:
        raise EmptyTrace("cannot summarize an empty trace")
    ledger = ledger if ledger is not None else trace.ledger
    latencies = [r.latency_ms for r in records]
    n = len(latencies)
    mean = sum(latencies) / n
    var = sum((x - mean) ** 2 for x in latencies) / n
    correct = sum(1 for r in records if r.correct)
    admitted = sum(1 for r in records if r.admitted)
    if trace.makespan_s > 0.0:
        throughput = n / trace.makespan_s
    else:
        throughput = math.inf
    return SummaryRow(
        label=label,
        avg_latency_ms=mean,
        std_latency_ms=math.sqrt(var),
        throughput_rps=throughput,
        energy_kwh=ledger.total_kwh(),
        co2_kg=ledger.total_co2_kg(),
        admitted_count=admitted,
        skipped_count=n - admitted,
        accuracy=correct / n,
    )


def _pct_delta(controlled: float, standard: float) -> float:
    if controlled == standard:
        return 0.0
    if standard == 0.0:
        return math.copysign(math.inf, controlled - standard)
    return (controlled - standard) / standard * 100.0


def compare_ablation(standard: SummaryRow, controlled: SummaryRow) -> AblationReport:
    """Deltas of the controlled arm relative to the standard arm."""
    if standard.completed != controlled.completed:
        raise MismatchedRun(
            f"arms saw different request counts: "
            f"{standard.completed} vs {controlled.completed}"
        )
    return AblationReport(
        standard=standard,
        controlled=controlled,
        total_time_delta_pct=_pct_delta(controlled.total_time_s, standard.total_time_s),
        latency_delta_pct=_pct_delta(controlled.avg_latency_ms, standard.avg_latency_ms),
        accuracy_delta_pp=(controlled.accuracy - standard.accuracy) * 100.0,
        admission_rate_pct=controlled.admitted_count / controlled.completed * 100.0,
    )


def export_csv(rows: Iterable[SummaryRow], path: str | Path) -> None:
    """Write summary rows with the fixed header; floats keep full precision."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow([
                row.label,
                repr(row.avg_latency_ms),
                repr(row.std_latency_ms),
                repr(row.throughput_rps),
                repr(row.energy_kwh),
                repr(row.co2_kg),
                row.admitted_count,
                row.skipped_count,
                repr(row.accuracy),
            ])


def read_summary_csv(path: str | Path) -> list[SummaryRow]:
    """Parse a file written by export_csv back into rows."""
    rows: list[SummaryRow] = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for rec in reader:
            rows.append(SummaryRow(
                label=rec["label"],
                avg_latency_ms=float(rec["avg_latency_ms"]),
                std_latency_ms=float(rec["std_latency_ms"]),
                throughput_rps=float(rec["throughput_rps"]),
                energy_kwh=float(rec["energy_kwh"]),
                co2_kg=float(rec["co2_kg"]),
                admitted_count=int(rec["admitted"]),
                skipped_count=int(rec["skipped"]),
                accuracy=float(rec["accuracy"]),
            ))
    return rows


def export_jsonl(trace: "RunTrace", path: str | Path) -> None:
    """One JSON object per completion record, in trace order."""
    with open(path, "w", newline="") as fh:
        for rec in trace.records:
            fh.write(json.dumps({
                "request_id": rec.request_id,
                "admitted": rec.admitted,
                "path": rec.path,
                "enqueue_t": rec.enqueue_t,
                "start_t": rec.start_t,
                "finish_t": rec.finish_t,
                "latency_ms": rec.latency_ms,
                "joules": rec.joules,
                "predicted_label": rec.predicted_label,
                "correct": rec.correct,
            }))
            fh.write("\n")


def pareto_points(rows: Sequence[SummaryRow]) -> list[SummaryRow]:
    """Non-dominated rows under (minimize latency, minimize energy).

    A row is dominated when another row is no worse on both axes and
    strictly better on at least one.  Input order is preserved among
    survivors; duplicates of a frontier point all survive.
    """
    order = sorted(range(len(rows)),
                   key=lambda i: (rows[i].avg_latency_ms, rows[i].energy_kwh, i))
    dominated = [False] * len(rows)
    best_energy_smaller_lat = math.inf
    i = 0
    while i < len(order):
        # group indices sharing the same latency
        j = i
        lat = rows[order[i]].avg_latency_ms
        while j < len(order) and rows[order[j]].avg_latency_ms == lat:
            j += 1
        group = order[i:j]
        group_min_e = min(rows[g].energy_kwh for g in group)
        for g in group:
            e = rows[g].energy_kwh
            if best_energy_smaller_lat <= e or group_min_e < e:
                dominated[g] = True
        best_energy_smaller_lat = min(best_energy_smaller_lat, group_min_e)
        i = j
    return [row for k, row in enumerate(rows) if not dominated[k]]
