import json
import math

import numpy as np
import pytest

from greengate.energy import EnergyLedger
from greengate.errors import EmptyTrace, MismatchedRun
from greengate.servesim import CompletionRecord, RunTrace
from greengate.telemetry import (
    CSV_HEADER,
    SummaryRow,
    compare_ablation,
    export_csv,
    export_jsonl,
    pareto_points,
    percentile_nearest_rank,
    read_summary_csv,
    summarize,
)


def _record(i, latency_ms, admitted=True, correct=True, joules=0.0):
    start = 0.001 * i
    return CompletionRecord(
        request_id=i, admitted=admitted, path="DIRECT" if admitted else "NONE",
        enqueue_t=start, start_t=start, finish_t=start + latency_ms / 1000.0,
        latency_ms=latency_ms, joules=joules, predicted_label=0,
        correct=correct,
    )


def _trace(latencies, makespan=1.0, **kwargs):
    records = [_record(i, lat, **kwargs) for i, lat in enumerate(latencies)]
    return RunTrace(records=records, makespan_s=makespan, ledger=EnergyLedger(),
                    admitted=sum(1 for r in records if r.admitted),
                    skipped=sum(1 for r in records if not r.admitted))


def _row(label, lat, kwh):
    return SummaryRow(label=label, avg_latency_ms=lat, std_latency_ms=0.0,
                      throughput_rps=100.0, energy_kwh=kwh, co2_kg=kwh * 0.5,
                      admitted_count=90, skipped_count=10, accuracy=0.9)


# -- percentile ---------------------------------------------------------------

def test_percentile_examples():
    assert percentile_nearest_rank(list(range(1, 101)), 95.0) == 95
    assert percentile_nearest_rank([1, 2, 3, 4], 95.0) == 4
    assert percentile_nearest_rank([7], 40.0) == 7


def test_percentile_empty_rejected():
    with pytest.raises(EmptyTrace):
        percentile_nearest_rank([], 95.0)


@pytest.mark.parametrize("p", [0.0, -5.0, 100.5])
def test_percentile_p_validated(p):
    with pytest.raises(ValueError):
        percentile_nearest_rank([1.0], p)


def test_percentile_matches_brute_force():
    rng = np.random.default_rng(17)
    for _ in range(300):
        n = int(rng.integers(1, 200))
        values = [float(v) for v in rng.normal(0.0, 50.0, size=n)]
        p = float(rng.uniform(0.001, 100.0))
        # brute force: smallest value whose cumulative count reaches p%
        ordered = sorted(values)
        need = p / 100.0 * n
        expected = next(v for i, v in enumerate(ordered, start=1) if i >= need)
        assert percentile_nearest_rank(values, p) == expected


# -- summarize ----------------------------------------------------------------

def test_summarize_constant_latency():
    row = summarize(_trace([5.0] * 10))
    assert row.avg_latency_ms == 5.0
    assert row.std_latency_ms == 0.0
    assert row.accuracy == 1.0


def test_summarize_population_sigma():
    row = summarize(_trace([10.0, 30.0]))
    assert row.avg_latency_ms == 20.0
    assert row.std_latency_ms == 10.0


def test_summarize_throughput_definition():
    row = summarize(_trace([5.0] * 20, makespan=4.0))
    assert row.throughput_rps == pytest.approx(5.0, rel=1e-12)
    assert row.total_time_s == pytest.approx(4.0, rel=1e-12)
    assert row.completed == 20


def test_summarize_zero_makespan_is_inf_throughput():
    row = summarize(_trace([0.0], makespan=0.0))
    assert math.isinf(row.throughput_rps)
    assert row.total_time_s == 0.0


def test_summarize_counts_and_accuracy():
    records = [_record(0, 5.0, correct=True), _record(1, 5.0, correct=False),
               _record(2, 0.0, admitted=False, correct=True)]
    trace = RunTrace(records=records, makespan_s=1.0, ledger=EnergyLedger(),
                     admitted=2, skipped=1)
    row = summarize(trace)
    assert (row.admitted_count, row.skipped_count) == (2, 1)
    assert row.accuracy == pytest.approx(2.0 / 3.0)


def test_summarize_empty_rejected():
    with pytest.raises(EmptyTrace):
        summarize(_trace([]))


# -- ablation comparison --------------------------------------------------------

def test_compare_ablation_time_delta():
    std = _row("standard", 5.0, 0.2)
    ctl = _row("bio", 2.9, 0.1)
    std.throughput_rps = 100 / 0.50
    ctl.throughput_rps = 100 / 0.29
    report = compare_ablation(std, ctl)
    assert report.total_time_delta_pct == pytest.approx(-42.0, abs=1e-9)
    assert report.latency_delta_pct == pytest.approx(-42.0, abs=1e-9)


def test_compare_ablation_identical_rows():
    report = compare_ablation(_row("a", 5.0, 0.2), _row("b", 5.0, 0.2))
    assert report.total_time_delta_pct == 0.0
    assert report.latency_delta_pct == 0.0
    assert report.accuracy_delta_pp == 0.0


def test_compare_ablation_accuracy_pp():
    std = _row("standard", 5.0, 0.2)
    ctl = _row("bio", 5.0, 0.2)
    std.accuracy = 0.910
    ctl.accuracy = 0.905
    report = compare_ablation(std, ctl)
    assert report.accuracy_delta_pp == pytest.approx(-0.5, abs=1e-9)


def test_compare_ablation_requires_same_count():
    std = _row("standard", 5.0, 0.2)
    ctl = _row("bio", 5.0, 0.2)
    ctl.skipped_count += 1
    with pytest.raises(MismatchedRun):
        compare_ablation(std, ctl)


def test_admission_rate_of_controlled_arm():
    report = compare_ablation(_row("a", 5.0, 0.2), _row("b", 5.0, 0.2))
    assert report.admission_rate_pct == pytest.approx(90.0, abs=1e-9)


# -- export -------------------------------------------------------------------

def test_csv_header_exact(tmp_path):
    path = tmp_path / "summary.csv"
    export_csv([], path)
    assert path.read_text() == ",".join(CSV_HEADER) + "\n"


def test_csv_round_trip(tmp_path):
    row = SummaryRow(label="x", avg_latency_ms=125.21348, std_latency_ms=21.52,
                     throughput_rps=79.9333333, energy_kwh=0.1972, co2_kg=0.0986,
                     admitted_count=58, skipped_count=42, accuracy=0.93)
    path = tmp_path / "summary.csv"
    export_csv([row], path)
    assert read_summary_csv(path) == [row]


def test_jsonl_line_per_record(tmp_path):
    trace = _trace([1.0, 2.0, 3.0])
    path = tmp_path / "trace.jsonl"
    export_jsonl(trace, path)
    lines = path.read_text().splitlines()
    assert len(lines) == 3
    first = json.loads(lines[0])
    assert first["request_id"] == 0
    assert first["latency_ms"] == 1.0


# -- pareto -------------------------------------------------------------------

def test_pareto_examples():
    single = [_row("a", 10.0, 1.0)]
    assert pareto_points(single) == single

    both = [_row("a", 10.0, 2.0), _row("b", 20.0, 1.0)]
    assert pareto_points(both) == both

    dominated = [_row("a", 10.0, 1.0), _row("b", 20.0, 2.0)]
    assert pareto_points(dominated) == dominated[:1]


def test_pareto_duplicates_survive():
    rows = [_row("a", 10.0, 1.0), _row("b", 10.0, 1.0)]
    assert pareto_points(rows) == rows


def test_pareto_matches_pairwise_oracle():
    rng = np.random.default_rng(19)
    for _ in range(50):
        n = int(rng.integers(1, 30))
        rows = [_row(f"r{i}", float(rng.integers(1, 8)), float(rng.integers(1, 8)))
                for i in range(n)]

        def dominated(i):
            for j in range(n):
                if j == i:
                    continue
                better_eq = (rows[j].avg_latency_ms <= rows[i].avg_latency_ms
                             and rows[j].energy_kwh <= rows[i].energy_kwh)
                strict = (rows[j].avg_latency_ms < rows[i].avg_latency_ms
                          or rows[j].energy_kwh < rows[i].energy_kwh)
                if better_eq and strict:
                    return True
            return False

        expected = [row for i, row in enumerate(rows) if not dominated(i)]
        assert pareto_points(rows) == expected
