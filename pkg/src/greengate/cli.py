"""Command-line harness: run simulations, ablations, sweeps, or the gateway.

Exit codes: 0 success, 2 bad config or arguments, 3 output I/O failure,
4 gateway port unavailable.
"""

from __future__ import annotations

import argparse
import copy
import json
import logging
import sys
from pathlib import Path

from .config import (
    dump_config,
    effective_config_dict,
    load_config,
    parse_config,
    set_param_path,
)
from .errors import ConfigError, GreengateError
from .gateway import GatewayState, make_server
from .servesim import SimConfig, run
from .telemetry import (
    SummaryRow,
    compare_ablation,
    export_csv,
    export_jsonl,
    pareto_points,
    summarize,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_PORT = 4

log = logging.getLogger("greengate.cli")


def _out_dir(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    trace = run(config)
    # fixed label: rerunning from the echoed effective config must produce
    # byte-identical outputs, so nothing filename-derived may leak in
    row = summarize(trace, label="run")
    try:
        out = _out_dir(args.out)
        dump_config(config, out / "effective_config.json")
        export_jsonl(trace, out / "trace.jsonl")
        export_csv([row], out / "summary.csv")
        (out / "ledger.json").write_text(
            json.dumps(trace.ledger.to_dict(), indent=2) + "\n"
        )
    except OSError as exc:
        print(f"error: cannot write outputs: {exc}", file=sys.stderr)
        return EXIT_IO
    print(row)
    return EXIT_OK


def _ablation_rows(config: SimConfig) -> tuple[list[tuple[str, float, float, float]], SummaryRow, SummaryRow]:
    from dataclasses import replace

    standard_cfg = replace(config, controller=replace(config.controller, enabled=False))
    standard = summarize(run(standard_cfg), label="standard")
    controlled = summarize(run(config), label="bio")
    report = compare_ablation(standard, controlled)
    std_rate = standard.admitted_count / standard.completed * 100.0
    rows = [
        ("total_time_s", standard.total_time_s, controlled.total_time_s,
         report.total_time_delta_pct),
        ("latency_per_req_ms", standard.avg_latency_ms, controlled.avg_latency_ms,
         report.latency_delta_pct),
        ("accuracy", standard.accuracy * 100.0, controlled.accuracy * 100.0,
         report.accuracy_delta_pp),
        ("admission_rate", std_rate, report.admission_rate_pct,
         report.admission_rate_pct - std_rate),
    ]
    return rows, standard, controlled


def cmd_ablation(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    rows, standard, controlled = _ablation_rows(config)
    try:
        out = _out_dir(args.out)
        dump_config(config, out / "effective_config.json")
        with open(out / "ablation.csv", "w", newline="") as fh:
            fh.write("metric,standard,bio,delta_pct\n")
            for metric, std, bio, delta in rows:
                fh.write(f"{metric},{std!r},{bio!r},{delta!r}\n")
    except OSError as exc:
        print(f"error: cannot write outputs: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"{'metric':<20} {'standard':>12} {'bio':>12} {'delta':>10}")
    for metric, std, bio, delta in rows:
        print(f"{metric:<20} {std:>12.4f} {bio:>12.4f} {delta:>+10.1f}")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    raw_values = [v for v in args.values.split(",") if v.strip() != ""]
    if not raw_values:
        raise ConfigError("sweep needs at least one value")
    base = effective_config_dict(config)
    rows: list[SummaryRow] = []
    for raw in raw_values:
        raw = raw.strip()
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        data = copy.deepcopy(base)
        set_param_path(data, args.param, value)
        swept = parse_config(data)
        trace = run(swept)
        rows.append(summarize(trace, label=f"{args.param}={raw}"))
    try:
        out = _out_dir(args.out)
        dump_config(config, out / "effective_config.json")
        export_csv(rows, out / "sweep.csv")
        export_csv(pareto_points(rows), out / "pareto.csv")
    except OSError as exc:
        print(f"error: cannot write outputs: {exc}", file=sys.stderr)
        return EXIT_IO
    for row in rows:
        print(row)
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    if not logging.getLogger("greengate").handlers and not logging.root.handlers:
        logging.basicConfig(level=logging.INFO, format="%(asctime)s %(name)s %(message)s")
    state = GatewayState(config.controller, ewma_lambda=config.ewma_lambda)
    try:
        server = make_server(state, bind=args.bind, port=args.port)
    except OSError as exc:
        print(f"error: cannot bind {args.bind}:{args.port}: {exc}", file=sys.stderr)
        return EXIT_PORT
    log.info("gateway listening on %s:%d", args.bind, args.port)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    print(json.dumps(state.snapshot(), indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="greengate",
        description="Energy-aware admission control: simulator, reports, gateway.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one simulation and write reports")
    p.add_argument("--config", required=True, help="JSON run config")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("ablation", help="admit-all arm vs controlled arm, same workload")
    p.add_argument("--config", required=True, help="JSON run config")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(fn=cmd_ablation)

    p = sub.add_parser("sweep", help="rerun one config across values of one parameter")
    p.add_argument("--config", required=True, help="JSON run config")
    p.add_argument("--param", required=True, help="dotted path, e.g. controller.beta")
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("serve", help="run the HTTP decision gateway")
    p.add_argument("--config", required=True, help="JSON run config (controller section is used)")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--bind", default="127.0.0.1")
    p.set_defaults(fn=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GreengateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def entrypoint() -> None:
    sys.exit(main(sys.argv[1:]))


if __name__ == "__main__":
    entrypoint()
