import math

import pytest

from greengate.energy import (
    DEFAULT_EWMA_LAMBDA,
    DEFAULT_GRID_INTENSITY,
    EnergyLedger,
    co2_of,
    ewma_update,
    to_kwh,
)
from greengate.errors import InvalidLambda, NegativeMeasurement


def test_ewma_fixed_point():
    assert ewma_update(3.0, 3.0, 0.9) == pytest.approx(3.0, abs=1e-12)


def test_ewma_first_sample_seeds():
    assert ewma_update(None, 7.5, 0.9) == 7.5


def test_ewma_hand_oracle():
    # 0.9*10 + 0.1*20
    assert ewma_update(10.0, 20.0, 0.9) == pytest.approx(11.0, abs=1e-12)


def test_ewma_geometric_convergence():
    lam, target = 0.9, 4.0
    value = 100.0
    err0 = abs(value - target)
    for n in range(1, 200):
        value = ewma_update(value, target, lam)
        assert abs(value - target) <= lam**n * err0 + 1e-9


@pytest.mark.parametrize("lam", [0.0, 1.0, -0.1, 1.5, math.nan])
def test_ewma_lambda_validated(lam):
    with pytest.raises(InvalidLambda):
        ewma_update(1.0, 1.0, lam)
    with pytest.raises(InvalidLambda):
        EnergyLedger(ewma_lambda=lam)


def test_ewma_negative_sample_rejected():
    with pytest.raises(NegativeMeasurement):
        ewma_update(1.0, -0.5, 0.9)


def test_to_kwh():
    assert to_kwh(0.0) == 0.0
    assert to_kwh(3.6e6) == 1.0
    assert to_kwh(709920.0) == pytest.approx(0.1972, abs=1e-12)


def test_co2_pairs_printed_precision():
    for kwh, kg in [(0.1972, 0.0986), (0.2637, 0.1318), (0.2100, 0.1050), (0.2198, 0.1099)]:
        assert round(co2_of(kwh, 0.5), 4) == kg
    assert co2_of(123.0, 0.0) == 0.0


def test_negative_energy_rejected():
    with pytest.raises(NegativeMeasurement):
        to_kwh(-1.0)
    with pytest.raises(NegativeMeasurement):
        co2_of(-0.1, 0.5)
    with pytest.raises(NegativeMeasurement):
        co2_of(0.1, -0.5)


def test_defaults():
    ledger = EnergyLedger()
    assert ledger.ewma_lambda == DEFAULT_EWMA_LAMBDA == 0.9
    assert ledger.grid_intensity == DEFAULT_GRID_INTENSITY == 0.5


def test_ledger_observe_seeds_then_blends():
    ledger = EnergyLedger()
    ledger.observe_request(10.0)
    assert ledger.ewma_joules_per_request == 10.0
    assert ledger.samples_seen == 1
    ledger.observe_request(20.0)
    assert ledger.ewma_joules_per_request == pytest.approx(11.0, abs=1e-12)
    assert ledger.total_joules == 30.0


def test_ledger_constant_stream_is_fixed_point():
    ledger = EnergyLedger()
    for _ in range(100):
        ledger.observe_request(3.0)
    assert ledger.ewma_joules_per_request == pytest.approx(3.0, abs=1e-9)


def test_accumulate():
    ledger = EnergyLedger()
    ledger.accumulate(0.0, 10.0)
    assert ledger.total_joules == 0.0
    ledger.accumulate(100.0, 36.0)
    assert ledger.total_joules == 3600.0
    ledger.accumulate(1000.0, 3600.0)
    assert ledger.total_kwh() == pytest.approx(1.001, abs=1e-12)


def test_accumulate_additivity():
    whole = EnergyLedger()
    whole.accumulate(75.0, 60.0)
    parts = EnergyLedger()
    for _ in range(60):
        parts.accumulate(75.0, 1.0)
    assert parts.total_joules == pytest.approx(whole.total_joules, rel=1e-12)


def test_accumulate_rejects_negative():
    ledger = EnergyLedger()
    with pytest.raises(NegativeMeasurement):
        ledger.accumulate(-1.0, 1.0)
    with pytest.raises(NegativeMeasurement):
        ledger.accumulate(1.0, -1.0)


def test_ledger_total_monotone():
    ledger = EnergyLedger()
    last = 0.0
    for joules in [5.0, 0.0, 2.5, 7.0]:
        ledger.observe_request(joules)
        assert ledger.total_joules >= last
        last = ledger.total_joules


def test_ledger_co2_uses_intensity():
    ledger = EnergyLedger(grid_intensity=0.5)
    ledger.accumulate(1000.0, 3600.0)  # exactly 1 kWh
    assert ledger.total_co2_kg() == pytest.approx(0.5, abs=1e-12)


def test_ledger_to_dict_round_numbers():
    ledger = EnergyLedger()
    ledger.observe_request(2.0)
    snap = ledger.to_dict()
    assert snap["total_joules"] == 2.0
    assert snap["ewma_joules_per_request"] == 2.0
    assert snap["samples_seen"] == 1
