"""
Simulating two serving paths under one admission policy
=======================================================

The simulator drives Poisson traffic through the controller and executes
admitted work on one of two paths: DIRECT (one request per server slot)
or BATCHED (requests fused up to max_batch_size or until the batching
window expires).  Skipped requests answer instantly from a zero-cost
fallback.
"""

from collections import Counter

from greengate import (
    ControllerConfig,
    PathAConfig,
    PathBConfig,
    RoutePolicy,
    SimConfig,
    WorkloadConfig,
    run,
    summarize,
)
from greengate.workload import ArrivalMode

config = SimConfig(
    seed=11,
    horizon_s=2.0,
    concurrency=2,
    baseline_power_w=50.0,
    path_a=PathAConfig(latency_mean_ms=5.0, latency_std_ms=1.2,
                       active_energy_j_per_req=2.5),
    path_b=PathBConfig(max_batch_size=8, batching_window_ms=10.0,
                       batch_base_ms=4.0, per_item_ms=1.0,
                       batch_base_energy_j=6.0, per_item_energy_j=1.5),
    controller=ControllerConfig(tau0=0.9, tau_inf=0.35, k=2.0,
                                routing=RoutePolicy.THRESHOLD_ON_QUEUE,
                                queue_threshold=2),
    workload=WorkloadConfig(mode=ArrivalMode.POISSON, rate_rps=400.0,
                            num_classes=4, confidence_low=0.55,
                            confidence_high=0.97),
)

trace = run(config)
row = summarize(trace, label="dual-path")

paths = Counter(r.path for r in trace.records)
print(f"arrivals {trace.arrivals}, admitted {trace.admitted}, skipped {trace.skipped}")
print(f"path mix: {dict(paths)}")
print(f"avg latency {row.avg_latency_ms:.2f} ms, throughput {row.throughput_rps:.1f} req/s")
print(f"energy {row.energy_kwh * 1000:.4f} Wh -> {row.co2_kg * 1000:.4f} g CO2")
print(f"accuracy {row.accuracy:.3f}")

print("\nfirst five admitted completions:")
for r in [r for r in trace.records if r.admitted][:5]:
    print(f"  id={r.request_id:<3} path={r.path:<7} "
          f"latency={r.latency_ms:7.2f} ms  joules={r.joules:.2f}")
