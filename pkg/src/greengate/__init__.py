"""Energy-aware admission control for inference serving.

A request is admitted only when its composite cost (utility, marginal
energy, congestion) clears a threshold that relaxes exponentially over
time.  The package bundles the controller, a deterministic simulator of
direct and dynamically batched serving, energy/CO2 accounting, telemetry
export, an HTTP decision gateway, and a CLI experiment harness.
"""

from .controller import (
    AdmissionController,
    AdmissionDecision,
    ControllerConfig,
    CostBreakdown,
    CostWeights,
    Direction,
    NormalizerChannel,
    NormalizerState,
    Reason,
    RoutePolicy,
    ServicePath,
    ThresholdSchedule,
    UtilityProxy,
    cost,
    entropy_utility,
    one_minus_confidence_utility,
    threshold_at,
)
from .config import (
    dump_config,
    effective_config_dict,
    load_config,
    parse_config,
    set_param_path,
)
from .energy import EnergyLedger, co2_of, ewma_update, to_kwh
from .gateway import GatewayState, make_server
from .presets import (
    ABLATION_SEED,
    ABLATION_TAU,
    REFERENCE_MEASUREMENTS,
    ablation_reference,
    energy_sweep_reference,
    calibration_profiles,
)
from .servesim import (
    CompletionRecord,
    CongestionSnapshot,
    PathAConfig,
    PathBConfig,
    RunTrace,
    SimConfig,
    Simulation,
    batch_flush_policy,
    run,
    sample_service_latency,
)
from .telemetry import (
    AblationReport,
    SummaryRow,
    compare_ablation,
    export_csv,
    export_jsonl,
    pareto_points,
    percentile_nearest_rank,
    summarize,
)
from .workload import (
    ArrivalMode,
    RequestFeatures,
    WorkloadConfig,
    onoff_arrivals,
    onoff_phases,
    poisson_arrivals,
    synth_request,
)

__version__ = "0.1.0"
