"""Shared builders for hand-made topologies used across the test modules."""

from __future__ import annotations

import math

from lorapcsma import topology
from lorapcsma.config import RunConfig
from lorapcsma.simulation import Simulation


def devices_at(positions, sf=8, period_s=100.0, p=1.0, tx_power_dbm=14.0):
    return topology.assign_attributes(
        [(x, y, 0.0) for x, y in positions], (sf,), (period_s,), p, tx_power_dbm
    )


def make_sim(devices, cfg: RunConfig | None = None, *, offsets_s=None, seed=1, areas=None):
    """Simulation over explicit devices; vicinity derived from the PHY defaults."""
    if cfg is None:
        cfg = RunConfig(n_devices=len(devices), seed=seed)
    loss = cfg.loss_params()
    table = cfg.sensitivity_table()
    vicinity = topology.build_vicinity(devices, loss, table)
    return Simulation(cfg, devices, vicinity, offsets_s=offsets_s, seed=seed, areas=areas)


def hidden_star_positions(ring_radius_m=4877.0, n_ring=8):
    """n_ring + 1 SF8 positions that are pairwise hidden yet gateway-covered.

    Adjacent ring chord 2*R*sin(pi/n) and the centre-to-ring distance both
    exceed the SF8 end-device detect range (~3509 m) while staying inside
    the SF8 gateway range (~4915 m).
    """
    positions = [(0.0, 0.0)]
    for k in range(n_ring):
        angle = 2.0 * math.pi * k / n_ring
        positions.append((ring_radius_m * math.cos(angle), ring_radius_m * math.sin(angle)))
    return positions


def overlapping_pairs(records):
    """Index pairs of records whose on-air intervals strictly overlap."""
    pairs = []
    for a in range(len(records)):
        for b in range(a + 1, len(records)):
            ra, rb = records[a], records[b]
            if ra.air_start_us < rb.air_end_us and rb.air_start_us < ra.air_end_us:
                pairs.append((a, b))
    return pairs
