"""Parameter-sweep runner and the pure-ALOHA throughput validation."""

from __future__ import annotations

import math
import statistics
from dataclasses import replace
from itertools import product

from . import phy
from .config import ConfigError, RunConfig, SweepGrid
from .metrics import Counters, compute_prr
from .simulation import run_scenario


def _fmt_set(values) -> str:
    return "{" + ",".join(f"{v:g}" for v in values) + "}"


def _fmt_p(p) -> str:
    if isinstance(p, tuple):
        return "{" + "|".join(f"{v:.6f}" for v in p) + "}"
    return f"{p:.6f}"


def result_row(scenario: str, seed, cfg: RunConfig, counters: Counters) -> dict:
    prr_generated, prr_sent = compute_prr(counters)
    return {
        "scenario": scenario,
        "seed": seed,
        "mac": cfg.mac,
        "n_devices": cfg.n_devices,
        "sf_set": _fmt_set(cfg.sf_set),
        "p": _fmt_p(cfg.p),
        "n_areas": cfg.n_areas,
        "period_set": _fmt_set(cfg.period_set_s),
        "generated": counters.generated,
        "sent": counters.sent,
        "suppressed": counters.suppressed,
        "received": counters.received,
        "collided": counters.collided,
        "under_sensitivity": counters.under_sensitivity,
        "no_path": counters.no_path,
        "prr_generated": prr_generated,
        "prr_sent": prr_sent,
    }


def scenario_name(n_devices: int, sf_set, p, n_areas: int) -> str:
    sfs = "-".join(str(sf) for sf in sf_set)
    p_label = f"{p:g}" if isinstance(p, (int, float)) else "custom"
    return f"n{n_devices}_sf{sfs}_p{p_label}_a{n_areas}"


def run_sweep(base_cfg: RunConfig, grid: SweepGrid) -> list[dict]:
    """Cartesian product of grid cells x seeds, one independent run each.

    Appends a mean and a population-stddev summary row of prr_generated per
    cell (seed column ``mean``/``stddev``).
    """
    device_counts = grid.device_counts or (base_cfg.n_devices,)
    p_values = grid.p_values or (base_cfg.p,)
    sf_sets = grid.sf_sets or (base_cfg.sf_set,)
    n_areas_values = grid.n_areas_values or (base_cfg.n_areas,)
    rows: list[dict] = []
    for n_devices, sf_set, p, n_areas in product(
        device_counts, sf_sets, p_values, n_areas_values
    ):
        cfg = replace(
            base_cfg, n_devices=n_devices, sf_set=sf_set, p=p, n_areas=n_areas
        )
        name = scenario_name(n_devices, sf_set, p, n_areas)
        prrs = []
        summary_cfg = cfg
        for seed in grid.seeds:
            result = run_scenario(cfg, seed=seed)
            row = result_row(name, seed, cfg, result.counters)
            rows.append(row)
            if row["prr_generated"] is not None:
                prrs.append(row["prr_generated"])
        for label, value in (
            ("mean", statistics.mean(prrs) if prrs else None),
            ("stddev", statistics.pstdev(prrs) if prrs else None),
        ):
            rows.append(
                {
                    "scenario": name,
                    "seed": label,
                    "mac": summary_cfg.mac,
                    "n_devices": n_devices,
                    "sf_set": _fmt_set(sf_set),
                    "p": _fmt_p(p),
                    "n_areas": n_areas,
                    "period_set": _fmt_set(summary_cfg.period_set_s),
                    "prr_generated": value,
                }
            )
    return rows


def aloha_validation(g_values, cfg: RunConfig) -> list[dict]:
    """Throughput S (received per packet-time) per offered load G.

    Each point reruns the scenario at aggregate Poisson load G and reports
    S next to the pure-ALOHA reference G*exp(-2G).
    """
    if cfg.mac != "aloha":
        raise ConfigError("aloha_validation requires mac = aloha")
    if cfg.traffic != "poisson":
        raise ConfigError("aloha_validation requires traffic = poisson")
    if len(cfg.sf_set) != 1:
        raise ConfigError("aloha_validation requires a single SF")
    toa_s = phy.time_on_air(cfg.sf_set[0], cfg.radio_params())
    rows = []
    for idx, g in enumerate(g_values):
        if g <= 0:
            raise ConfigError(f"offered load must be positive, got {g}")
        point = replace(cfg, offered_load=float(g), seed=cfg.seed + idx)
        result = run_scenario(point)
        packet_times = cfg.sim_time_s / toa_s
        rows.append(
            {
                "g": float(g),
                "throughput": result.counters.received / packet_times,
                "theoretical": g * math.exp(-2.0 * g),
            }
        )
    return rows


def aloha_csv_text(rows: list[dict]) -> str:
    lines = ["g,throughput,theoretical"]
    for row in rows:
        lines.append(
            f"{row['g']:.6f},{row['throughput']:.6f},{row['theoretical']:.6f}"
        )
    return "\n".join(lines) + "\n"
