"""
Per-request admission decisions
===============================

A controller scores each request as J = alpha*L + beta*E + gamma*C, where
L is the utility proxy (normalized score entropy here), E the rolling
energy per request, and C the congestion composite.  Confident requests
carry low entropy, so under the default direction (admit when J >= tau)
they are the first to be shed.
"""

from greengate import ControllerConfig, EnergyLedger, RequestFeatures

config = ControllerConfig(alpha=1.0, beta=0.0, gamma=0.0,
                          tau0=1.0, tau_inf=0.4, k=0.5)
controller = config.build(EnergyLedger())

requests = [
    ("hard: uniform scores", (0.50, 0.50)),
    ("borderline", (0.80, 0.20)),
    ("confident", (0.95, 0.05)),
    ("near one-hot", (0.999, 0.001)),
]

print("t (s)  request                scores         L=entropy   tau     decision")
for t in [0.0, 2.0, 4.0, 8.0]:
    for name, scores in requests:
        features = RequestFeatures(id=0, arrival_t=t, scores=scores, true_label=None)
        decision = controller.decide(features, now=t)
        b = decision.breakdown
        verdict = "ADMIT" if decision.admit else "skip"
        print(f"{t:4.1f}   {name:<22} {str(scores):<14} {b.utility:.4f}     "
              f"{b.threshold:.4f}  {verdict}")
    print()

print(f"admitted {controller.admitted_total}, skipped {controller.skipped_total}: "
      "the relaxing bar lets confident traffic back in over time")

# feeding measured outcomes back moves the energy signal the controller reads
controller.record_outcome(latency_ms=12.0, joules=3.5, queue_depth=2)
controller.record_outcome(latency_ms=9.0, joules=2.0, queue_depth=1)
print(f"energy EWMA after two outcomes: {controller.ledger.ewma_joules_per_request:.3f} J/request")
