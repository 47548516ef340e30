"""Exception types shared across the package."""


class GreengateError(Exception):
    """Base class for all greengate errors."""


class InvalidDistribution(GreengateError, ValueError):
    """Score vector is not a valid probability distribution."""


class InvalidSchedule(GreengateError, ValueError):
    """Threshold schedule has a non-positive decay rate or non-finite field."""


class InvalidLambda(GreengateError, ValueError):
    """EWMA smoothing factor outside the open interval (0, 1)."""


class NegativeMeasurement(GreengateError, ValueError):
    """A physical measurement (joules, watts, latency, ...) was negative."""


class EmptyTrace(GreengateError, ValueError):
    """Summary statistics requested over an empty completion trace."""


class MismatchedRun(GreengateError, ValueError):
    """Ablation arms were not produced from the same workload."""


class ConfigError(GreengateError, ValueError):
    """Simulation or service configuration is invalid."""
