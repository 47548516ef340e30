"""
Sweeping the energy weight and reading the Pareto frontier
==========================================================

With direction GEQ, a negative energy weight beta subtracts the (rolling,
normalized) joules-per-request signal from each request's score, so more
negative values shed more traffic.  Sweeping beta maps out the
latency/energy trade-off; pareto_points keeps the non-dominated rows.
"""

from dataclasses import replace

from greengate import pareto_points, run, summarize
from greengate.presets import energy_sweep_reference

base = energy_sweep_reference()

rows = []
for beta in [0.0, -0.1, -0.25, -0.5, -1.0]:
    config = replace(base, controller=replace(base.controller, beta=beta))
    rows.append(summarize(run(config), label=f"beta={beta}"))

print(f"{'label':<12} {'admitted':>8} {'avg ms':>8} {'energy (Wh)':>12}")
for row in rows:
    print(f"{row.label:<12} {row.admitted_count:>8} {row.avg_latency_ms:>8.2f} "
          f"{row.energy_kwh * 1000:>12.4f}")

frontier = pareto_points(rows)
print("\npareto frontier (minimize latency, minimize energy):")
for row in frontier:
    print(f"  {row.label}: {row.avg_latency_ms:.2f} ms, {row.energy_kwh * 1000:.4f} Wh")
