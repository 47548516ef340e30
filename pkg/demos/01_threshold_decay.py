"""
Threshold decay: permissive at startup, strict at steady state
==============================================================

The admission bar starts at tau0 and relaxes exponentially toward tau_inf
at rate k.  Requests are admitted when their composite cost clears the
current bar, so a high early bar admits almost everything while the loop
has no measurements yet.
"""

import math

from greengate import ThresholdSchedule, threshold_at

schedule = ThresholdSchedule(tau0=1.0, tau_inf=0.2, k=0.5)

print("t (s)    tau(t)")
for t in [0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0]:
    print(f"{t:5.1f}    {threshold_at(schedule, t):.6f}")

# the half-life identity: after ln(2)/k seconds the gap to tau_inf halves
half_life = math.log(2.0) / schedule.k
at_half = threshold_at(schedule, half_life)
print(f"\nhalf-life = ln(2)/k = {half_life:.4f} s")
print(f"tau(half-life) - tau_inf = {at_half - schedule.tau_inf:.6f}"
      f"  (expected {(schedule.tau0 - schedule.tau_inf) / 2:.6f})")
