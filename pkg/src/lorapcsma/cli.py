"""Command-line interface: run, sweep, validate-aloha."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import phy
from .config import ConfigError, RunConfig, load_config, load_grid
from .metrics import compute_prr, write_csv, write_trace
from .simulation import run_scenario
from .sweep import aloha_csv_text, aloha_validation, result_row, run_sweep
from .topology import GeometryError


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lorapcsma",
        description="Discrete-event LoRa network simulator with p-CSMA and ALOHA MACs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute a single scenario")
    run_p.add_argument("--config", required=True, help="scenario file (key = value)")
    run_p.add_argument("--seed", type=int, help="override the config seed")
    run_p.add_argument("--out", help="write a one-row result CSV")
    run_p.add_argument("--trace", help="dump the transmission log (TSV)")
    run_p.add_argument("--mode", choices=("pcsma", "aloha"), help="override the MAC mode")

    sweep_p = sub.add_parser("sweep", help="run a parameter grid")
    sweep_p.add_argument("--config", required=True, help="base scenario file")
    sweep_p.add_argument("--grid", required=True, help="grid file (sweep dimensions)")
    sweep_p.add_argument("--out", required=True, help="result CSV destination")
    sweep_p.add_argument("--mode", choices=("pcsma", "aloha"), help="override the MAC mode")

    val_p = sub.add_parser("validate-aloha", help="pure-ALOHA throughput curve")
    val_p.add_argument("--g", required=True, help="comma-separated offered loads, e.g. 0.1,0.5,1.0")
    val_p.add_argument("--out", help="CSV destination (default: stdout only)")
    val_p.add_argument("--sf", type=int, default=8)
    val_p.add_argument("--devices", type=int, default=100)
    val_p.add_argument(
        "--packet-times",
        type=float,
        default=200_000,
        help="simulated duration in packet airtimes per point",
    )
    val_p.add_argument("--seed", type=int, default=1)
    return parser


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.mode:
        cfg = replace(cfg, mac=args.mode)
    result = run_scenario(cfg, seed=args.seed)
    seed = cfg.seed if args.seed is None else args.seed
    scenario = Path(args.config).stem
    row = result_row(scenario, seed, cfg, result.counters)
    prr_generated, prr_sent = compute_prr(result.counters)
    c = result.counters
    print(f"scenario={scenario} seed={seed} mac={cfg.mac} devices={cfg.n_devices}")
    print(
        f"generated={c.generated} sent={c.sent} suppressed={c.suppressed} "
        f"received={c.received} collided={c.collided} "
        f"under_sensitivity={c.under_sensitivity} no_path={c.no_path} "
        f"pending_at_end={c.pending_at_end}"
    )
    print(
        "prr_generated="
        + (f"{prr_generated:.6f}" if prr_generated is not None else "undefined")
        + " prr_sent="
        + (f"{prr_sent:.6f}" if prr_sent is not None else "undefined")
    )
    if args.out:
        write_csv([row], args.out)
    if args.trace:
        write_trace(result.records, args.trace)
    return 0


def _cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    if args.mode:
        cfg = replace(cfg, mac=args.mode)
    grid = load_grid(args.grid)
    rows = run_sweep(cfg, grid)
    write_csv(rows, args.out)
    n_runs = sum(1 for row in rows if str(row["seed"]).lstrip("-").isdigit())
    print(f"{n_runs} runs -> {args.out}")
    return 0


def _cmd_validate_aloha(args) -> int:
    try:
        g_values = [float(tok) for tok in args.g.split(",") if tok.strip()]
    except ValueError:
        raise ConfigError(f"--g expects comma-separated numbers, got {args.g!r}") from None
    if not g_values:
        raise ConfigError("--g needs at least one offered-load value")
    toa_s = phy.time_on_air(args.sf, phy.RadioParams())
    cfg = RunConfig(
        n_devices=args.devices,
        sim_time_s=args.packet_times * toa_s,
        mac="aloha",
        traffic="poisson",
        sf_set=(args.sf,),
        seed=args.seed,
    )
    cfg.validate()
    rows = aloha_validation(g_values, cfg)
    text = aloha_csv_text(rows)
    print(text, end="")
    if args.out:
        Path(args.out).write_text(text)
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        return _cmd_validate_aloha(args)
    except (ConfigError, GeometryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
