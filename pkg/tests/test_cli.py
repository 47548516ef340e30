import csv
import json
import signal
import socket
import subprocess
import sys
import time
import urllib.request
from dataclasses import replace

import pytest

from greengate.cli import main
from greengate.config import dump_config
from greengate.presets import ablation_reference, energy_sweep_reference
from greengate.servesim import PathAConfig, SimConfig
from greengate.controller import ControllerConfig
from greengate.workload import ArrivalMode, WorkloadConfig


@pytest.fixture()
def small_config(tmp_path):
    config = SimConfig(
        seed=5, horizon_s=0.5, concurrency=4,
        path_a=PathAConfig(latency_mean_ms=4.0, latency_std_ms=1.0,
                           active_energy_j_per_req=1.5),
        controller=ControllerConfig(tau0=0.9, tau_inf=0.3, k=3.0),
        workload=WorkloadConfig(mode=ArrivalMode.POISSON, rate_rps=120.0),
    )
    path = tmp_path / "config.json"
    dump_config(config, path)
    return path


def _read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# -- simulate -----------------------------------------------------------------

def test_simulate_writes_reports(small_config, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["simulate", "--config", str(small_config), "--out", str(out)]) == 0
    for name in ("trace.jsonl", "summary.csv", "ledger.json", "effective_config.json"):
        assert (out / name).exists()
    assert "SummaryRow" in capsys.readouterr().out
    rows = _read_rows(out / "summary.csv")
    assert len(rows) == 1
    ledger = json.loads((out / "ledger.json").read_text())
    assert ledger["total_joules"] > 0


def test_simulate_missing_config_exits_2(tmp_path, capsys):
    code = main(["simulate", "--config", str(tmp_path / "missing.json"),
                 "--out", str(tmp_path / "out")])
    assert code == 2
    assert "error" in capsys.readouterr().err


def test_simulate_invalid_config_diagnostics(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"controller": {"tau_zero": 1.0}}')
    assert main(["simulate", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2
    assert "controller.tau_zero" in capsys.readouterr().err


def test_simulate_deterministic_trace(small_config, tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    main(["simulate", "--config", str(small_config), "--out", str(out1)])
    main(["simulate", "--config", str(small_config), "--out", str(out2)])
    assert (out1 / "trace.jsonl").read_bytes() == (out2 / "trace.jsonl").read_bytes()


def test_simulate_effective_config_round_trip(small_config, tmp_path):
    out1 = tmp_path / "a"
    main(["simulate", "--config", str(small_config), "--out", str(out1)])
    out2 = tmp_path / "b"
    main(["simulate", "--config", str(out1 / "effective_config.json"), "--out", str(out2)])
    for name in ("trace.jsonl", "summary.csv", "ledger.json", "effective_config.json"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


# -- ablation -----------------------------------------------------------------

def test_ablation_reference_table(tmp_path):
    config = tmp_path / "ablation.json"
    dump_config(ablation_reference(), config)
    out = tmp_path / "out"
    assert main(["ablation", "--config", str(config), "--out", str(out)]) == 0
    rows = {r["metric"]: r for r in _read_rows(out / "ablation.csv")}
    assert set(rows) == {"total_time_s", "latency_per_req_ms", "accuracy", "admission_rate"}
    assert float(rows["total_time_s"]["standard"]) == pytest.approx(0.50, abs=0.01)
    assert float(rows["total_time_s"]["bio"]) == pytest.approx(0.29, abs=0.02)
    assert float(rows["total_time_s"]["delta_pct"]) == pytest.approx(-42.0, abs=3.0)
    assert float(rows["latency_per_req_ms"]["bio"]) == pytest.approx(2.9, abs=0.2)
    assert float(rows["admission_rate"]["bio"]) == pytest.approx(58.0, abs=2.0)
    delta_pp = float(rows["accuracy"]["delta_pct"])
    assert -1.0 - 1e-9 <= delta_pp <= 1e-9


def test_ablation_disabled_in_both_arms_is_flat(tmp_path):
    config_obj = ablation_reference()
    config_obj = replace(config_obj, controller=replace(config_obj.controller, enabled=False))
    config = tmp_path / "flat.json"
    dump_config(config_obj, config)
    out = tmp_path / "out"
    assert main(["ablation", "--config", str(config), "--out", str(out)]) == 0
    for row in _read_rows(out / "ablation.csv"):
        assert float(row["delta_pct"]) == 0.0


def test_ablation_zero_admission_is_fallback_only(tmp_path):
    config_obj = ablation_reference()
    config_obj = replace(config_obj, controller=replace(
        config_obj.controller, tau0=1.5, tau_inf=1.5))
    config = tmp_path / "none.json"
    dump_config(config_obj, config)
    out = tmp_path / "out"
    assert main(["ablation", "--config", str(config), "--out", str(out)]) == 0
    rows = {r["metric"]: r for r in _read_rows(out / "ablation.csv")}
    assert float(rows["admission_rate"]["bio"]) == 0.0
    # every request takes the zero-latency fallback, so the run takes no time
    assert float(rows["total_time_s"]["bio"]) == 0.0
    assert float(rows["latency_per_req_ms"]["bio"]) == 0.0


# -- sweep --------------------------------------------------------------------

def test_sweep_k_three_values(small_config, tmp_path):
    out = tmp_path / "out"
    code = main(["sweep", "--config", str(small_config), "--param", "controller.k",
                 "--values", "0.5,1.0,2.0", "--out", str(out)])
    assert code == 0
    rows = _read_rows(out / "sweep.csv")
    assert [r["label"] for r in rows] == [
        "controller.k=0.5", "controller.k=1.0", "controller.k=2.0"]
    pareto = _read_rows(out / "pareto.csv")
    assert 1 <= len(pareto) <= 3


def test_sweep_beta_shifts_admission_monotonically(tmp_path):
    config = tmp_path / "sweep.json"
    dump_config(energy_sweep_reference(), config)
    out = tmp_path / "out"
    code = main(["sweep", "--config", str(config), "--param", "controller.beta",
                 "--values", "0,-0.25,-0.5,-1.0", "--out", str(out)])
    assert code == 0
    admitted = [int(r["admitted"]) for r in _read_rows(out / "sweep.csv")]
    assert admitted == sorted(admitted, reverse=True)
    assert admitted[0] > admitted[-1]


def test_sweep_unknown_param_exits_2(small_config, tmp_path, capsys):
    code = main(["sweep", "--config", str(small_config), "--param", "controller.nope",
                 "--values", "1,2", "--out", str(tmp_path / "out")])
    assert code == 2
    assert "unknown config path" in capsys.readouterr().err


def test_sweep_empty_values_exits_2(small_config, tmp_path):
    code = main(["sweep", "--config", str(small_config), "--param", "controller.k",
                 "--values", "", "--out", str(tmp_path / "out")])
    assert code == 2


# -- serve --------------------------------------------------------------------

def test_serve_bad_config_exits_2(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{nope}")
    assert main(["serve", "--config", str(bad), "--port", "0"]) == 2


def test_serve_port_in_use_exits_4(small_config):
    blocker = socket.socket()
    blocker.bind(("127.0.0.1", 0))
    blocker.listen(1)
    port = blocker.getsockname()[1]
    try:
        assert main(["serve", "--config", str(small_config), "--port", str(port)]) == 4
    finally:
        blocker.close()


def test_serve_sigint_dumps_state_and_exits_0(small_config):
    probe = socket.socket()
    probe.bind(("127.0.0.1", 0))
    port = probe.getsockname()[1]
    probe.close()
    proc = subprocess.Popen(
        [sys.executable, "-m", "greengate.cli", "serve",
         "--config", str(small_config), "--port", str(port)],
        stdout=subprocess.PIPE, stderr=subprocess.STDOUT, text=True,
    )
    try:
        deadline = time.time() + 10
        while True:
            try:
                with urllib.request.urlopen(f"http://127.0.0.1:{port}/v1/state", timeout=1) as r:
                    assert r.status == 200
                    break
            except OSError:
                assert time.time() < deadline, "gateway never came up"
                time.sleep(0.05)
        proc.send_signal(signal.SIGINT)
        out, _ = proc.communicate(timeout=10)
    finally:
        if proc.poll() is None:
            proc.kill()
    assert proc.returncode == 0
    state = json.loads(out[out.index("{"):])
    assert "tau_now" in state and "admitted_total" in state
