"""
Ablation: open-loop admit-everything vs the tuned controller
============================================================

Both arms replay the identical workload and seed.  The open-loop arm
serves all 100 requests serially at a fixed 5 ms; the controlled arm sheds
the low-entropy (confident) requests to the zero-cost fallback.  With a
serial server, total time shrinks by exactly the rejection fraction.
"""

from dataclasses import replace

from greengate import compare_ablation, run, summarize
from greengate.presets import ablation_reference

config = ablation_reference()
standard_cfg = replace(config, controller=replace(config.controller, enabled=False))

standard = summarize(run(standard_cfg), label="standard")
controlled = summarize(run(config), label="controlled")
report = compare_ablation(standard, controlled)

print(f"{'metric':<22} {'standard':>10} {'controlled':>11}")
print(f"{'total time (s)':<22} {standard.total_time_s:>10.2f} {controlled.total_time_s:>11.2f}")
print(f"{'latency/request (ms)':<22} {standard.avg_latency_ms:>10.2f} "
      f"{controlled.avg_latency_ms:>11.2f}")
print(f"{'accuracy (%)':<22} {standard.accuracy * 100:>10.1f} {controlled.accuracy * 100:>11.1f}")
print(f"{'admitted (%)':<22} {100.0:>10.1f} {report.admission_rate_pct:>11.1f}")

print(f"\ntotal time delta: {report.total_time_delta_pct:+.1f}%")
print(f"accuracy delta:   {report.accuracy_delta_pp:+.1f} pp")
print("the time saved tracks the rejection fraction; accuracy barely moves because")
print("only requests the model was already confident about were shed")
