"""Joules/kWh/CO2 accounting and the rolling joules-per-request estimate.

The ledger tracks two things: cumulative energy drawn by the system
(baseline power plus per-request active energy) and an exponentially
weighted moving average of joules consumed per served request.  The EWMA
is the marginal-energy signal the admission controller reads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidLambda, NegativeMeasurement

JOULES_PER_KWH = 3.6e6

DEFAULT_EWMA_LAMBDA = 0.9
# kg CO2 per kWh.  Matches the emission factor baked into the bundled
# reference profiles; override per deployment region.
DEFAULT_GRID_INTENSITY = 0.5


def ewma_update(prev: float | None, sample: float, lam: float) -> float:
    """One EWMA step: lam * prev + (1 - lam) * sample.

    ``prev`` is None before the first sample, in which case the sample
    itself seeds the average.
    """
    if not (math.isfinite(lam) and 0.0 < lam < 1.0):
        raise InvalidLambda(f"ewma lambda must be in (0, 1), got {lam!r}")
    if sample < 0.0:
        raise NegativeMeasurement(f"ewma sample must be >= 0, got {sample!r}")
    if prev is None:
        return sample
    return lam * prev + (1.0 - lam) * sample


def to_kwh(joules: float) -> float:
    """Convert joules to kilowatt-hours."""
    if joules < 0.0:
        raise NegativeMeasurement(f"joules must be >= 0, got {joules!r}")
    return joules / JOULES_PER_KWH


def co2_of(kwh: float, intensity: float) -> float:
    """Emissions in kg CO2 for ``kwh`` at a grid intensity in kg/kWh."""
    if kwh < 0.0 or intensity < 0.0:
        raise NegativeMeasurement(
            f"kwh and intensity must be >= 0, got {kwh!r}, {intensity!r}"
        )
    return kwh * intensity


@dataclass
class EnergyLedger:
    """Single-writer energy account for one run or one service process."""

    grid_intensity: float = DEFAULT_GRID_INTENSITY
    ewma_lambda: float = DEFAULT_EWMA_LAMBDA
    total_joules: float = 0.0
    ewma_joules_per_request: float = 0.0
    samples_seen: int = 0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.ewma_lambda) and 0.0 < self.ewma_lambda < 1.0):
            raise InvalidLambda(
                f"ewma lambda must be in (0, 1), got {self.ewma_lambda!r}"
            )
        if self.grid_intensity < 0.0:
            raise NegativeMeasurement(
                f"grid intensity must be >= 0, got {self.grid_intensity!r}"
            )

    def observe_request(self, joules: float) -> float:
        """Record the active energy of one served request.

        Updates the joules-per-request EWMA (the first sample seeds it)
        and adds the joules to the cumulative total.  Returns the new EWMA.
        """
        if joules < 0.0:
            raise NegativeMeasurement(f"joules must be >= 0, got {joules!r}")
        prev = self.ewma_joules_per_request if self.samples_seen > 0 else None
        self.ewma_joules_per_request = ewma_update(prev, joules, self.ewma_lambda)
        self.samples_seen += 1
        self.total_joules += joules
        return self.ewma_joules_per_request

    def accumulate(self, power_watts: float, dt_seconds: float) -> None:
        """Add ``power_watts * dt_seconds`` joules of (baseline) draw."""
        if power_watts < 0.0 or dt_seconds < 0.0:
            raise NegativeMeasurement(
                f"power and dt must be >= 0, got {power_watts!r}, {dt_seconds!r}"
            )
        self.total_joules += power_watts * dt_seconds

    def total_kwh(self) -> float:
        return to_kwh(self.total_joules)

    def total_co2_kg(self) -> float:
        return co2_of(self.total_kwh(), self.grid_intensity)

    def to_dict(self) -> dict:
        """Snapshot for run reports (ledger.json)."""
        return {
            "total_joules": self.total_joules,
            "energy_kwh": self.total_kwh(),
            "co2_kg": self.total_co2_kg(),
            "ewma_joules_per_request": self.ewma_joules_per_request,
            "samples_seen": self.samples_seen,
            "grid_intensity_kg_per_kwh": self.grid_intensity,
            "ewma_lambda": self.ewma_lambda,
        }
