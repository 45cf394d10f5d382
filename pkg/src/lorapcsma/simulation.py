"""Wires topology, MAC, and gateway onto the event kernel for one run."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import phy, topology
from .config import RunConfig
from .gateway import GatewayPhy, TxRecord
from .kernel import RngStreams, Scheduler, us_from_s
from .mac import ChannelStateArray, PcsmaMac, PersistenceTable, Phase
from .metrics import Counters

# One named stream per concern so changing one consumer leaves the others'
# draw sequences untouched.
STREAM_PLACEMENT = "placement"
STREAM_TRAFFIC = "traffic"
STREAM_PERSISTENCE = "persistence"
STREAM_SHADOWING = "shadowing"

_OUTCOME_FIELDS = ("sent", "received", "collided", "under_sensitivity", "no_path")


@dataclass
class RunAudit:
    book_count: int = 0
    free_count: int = 0
    max_paths_bound: int = 0
    channel_clear: bool = True
    events_executed: int = 0


@dataclass
class RunResult:
    counters: Counters
    records: list[TxRecord]
    audit: RunAudit
    devices: list[topology.DeviceSpec]
    vicinity: np.ndarray
    areas: list[int]
    seed: int
    config: RunConfig | None = field(repr=False, default=None)


def build_topology(cfg: RunConfig, streams: RngStreams) -> topology.Topology:
    """Generated placement: validated cluster geometry, round-robin attributes."""
    loss = cfg.loss_params()
    table = cfg.sensitivity_table()
    geom = cfg.geometry()
    topology.validate_geometry(geom, cfg.sf_set, cfg.tx_power_dbm, loss, table)
    positions = topology.place_clusters(cfg.n_devices, geom, streams.stream(STREAM_PLACEMENT))
    devices = topology.assign_attributes(
        positions, cfg.sf_set, cfg.period_set_s, cfg.p, cfg.tx_power_dbm
    )
    if cfg.shadowing_sigma_db > 0:
        shadow_rng = streams.stream(STREAM_SHADOWING)
        for dev in devices:
            dev.shadow_db = shadow_rng.normal(cfg.shadowing_sigma_db)
    prx = topology.gateway_rx_dbm(devices, loss)
    if cfg.shadowing_sigma_db == 0:
        for dev, rx in zip(devices, prx):
            if rx < table.threshold_dbm(dev.sf, phy.GATEWAY):
                raise topology.GeometryError(
                    f"device {dev.id} (SF{dev.sf}) is below gateway sensitivity "
                    f"({rx:.1f} dBm); geometry leaves it out of coverage"
                )
    vicinity = topology.build_vicinity(devices, loss, table)
    areas = topology.device_areas(cfg.n_devices, cfg.n_areas)
    return topology.Topology(devices=devices, vicinity=vicinity, areas=areas, prx_dbm=prx)


def file_topology(cfg: RunConfig) -> topology.Topology:
    devices = topology.load_device_file(cfg.device_file, cfg.tx_power_dbm)
    if cfg.n_devices != len(devices):
        raise ValueError(
            f"n_devices={cfg.n_devices} but {cfg.device_file!r} defines {len(devices)} devices"
        )
    loss = cfg.loss_params()
    table = cfg.sensitivity_table()
    vicinity = topology.build_vicinity(devices, loss, table)
    prx = topology.gateway_rx_dbm(devices, loss)
    return topology.Topology(devices=devices, vicinity=vicinity, areas=[0] * len(devices), prx_dbm=prx)


class Simulation:
    """One independent run: owns the clock, all MAC state, and the gateway."""

    def __init__(
        self,
        cfg: RunConfig,
        devices: list[topology.DeviceSpec],
        vicinity: np.ndarray,
        *,
        areas: list[int] | None = None,
        prx_dbm: list[float] | None = None,
        seed: int | None = None,
        offsets_s: list[float] | None = None,
    ) -> None:
        self.cfg = cfg
        self.devices = devices
        self.vicinity = vicinity
        self.areas = areas if areas is not None else [0] * len(devices)
        self.seed = cfg.seed if seed is None else seed
        self.offsets_s = offsets_s
        self.streams = RngStreams(self.seed)
        self.sched = Scheduler()
        self.counters = Counters()
        self.records: list[TxRecord] = []

        radio = cfg.radio_params()
        loss = cfg.loss_params()
        table = cfg.sensitivity_table()
        if prx_dbm is None:
            prx_dbm = topology.gateway_rx_dbm(devices, loss)
        self._toa_s = {sf: phy.time_on_air(sf, radio) for sf in sorted({d.sf for d in devices})}
        toa_us = [us_from_s(self._toa_s[d.sf]) for d in devices]
        if cfg.sensing_interval_s is not None:
            sense_us = [us_from_s(cfg.sensing_interval_s)] * len(devices)
        else:
            sense_us = [us_from_s(self._toa_s[d.sf] / 2.0) for d in devices]

        neighbors = [list(np.flatnonzero(vicinity[i])) for i in range(len(devices))]
        self.channel = ChannelStateArray(len(devices))
        self.ptable = PersistenceTable([d.persistence for d in devices])
        self.mac = PcsmaMac(
            self.sched,
            self.channel,
            self.ptable,
            neighbors,
            self.counters,
            self.records,
            self.streams.stream(STREAM_PERSISTENCE),
            sf=[d.sf for d in devices],
            prx_dbm=list(prx_dbm),
            toa_us=toa_us,
            sense_us=sense_us,
            period_us=[us_from_s(d.period_s) for d in devices],
            periodic=cfg.traffic == "periodic",
            aloha=cfg.mac == "aloha",
            duty_cycle_enforce=cfg.duty_cycle_enforce,
        )
        self.gateway = GatewayPhy(
            cfg.gateway_paths, table, self.counters, self.mac.finish_transmission
        )
        self.mac.gateway = self.gateway

    # -- traffic seeding ---------------------------------------------------

    def _seed_periodic(self) -> None:
        if self.offsets_s is not None and len(self.offsets_s) != len(self.devices):
            raise ValueError("offsets_s needs one entry per device")
        traffic = self.streams.stream(STREAM_TRAFFIC)
        for i, dev in enumerate(self.devices):
            if self.offsets_s is not None:
                offset_us = us_from_s(self.offsets_s[i])
            elif self.cfg.offsets == "zero":
                offset_us = 0
            else:
                offset_us = us_from_s(traffic.uniform() * dev.period_s)
            self.sched.schedule(offset_us, self.mac.generate, i)

    def _seed_poisson(self) -> None:
        sf = self.devices[0].sf
        self._poisson_mean_s = self._toa_s[sf] / self.cfg.offered_load
        self._traffic_rng = self.streams.stream(STREAM_TRAFFIC)
        self._schedule_arrival(0)

    def _schedule_arrival(self, k: int) -> None:
        gap_us = us_from_s(self._traffic_rng.exponential(self._poisson_mean_s))
        self.sched.schedule(self.sched.now_us + gap_us, self._arrival, k)

    def _arrival(self, k: int) -> None:
        # Aggregate Poisson arrivals handed to devices round-robin.
        self.mac.generate(k % len(self.devices))
        self._schedule_arrival(k + 1)

    # -- execution -----------------------------------------------------------

    def run(self) -> RunResult:
        if self.cfg.traffic == "poisson":
            self._seed_poisson()
        else:
            self._seed_periodic()
        # The simulated window is [0, sim_time): a generation firing at
        # exactly sim_time belongs to the next window and stays queued.
        self.sched.run_until(us_from_s(self.cfg.sim_time_s) - 1)

        # Packets without a final outcome when the clock stops: waiting in
        # back-off or still on air.  On-air ones release their path and flag
        # so conservation holds for every run.
        self.counters.pending_at_end = sum(
            1 for phase in self.mac.phase if phase != Phase.IDLE
        )
        for i, phase in enumerate(self.mac.phase):
            if phase == Phase.TRANSMITTING:
                self.gateway.abort(self.mac.in_flight[i])

        self._fill_breakdowns()
        self.counters.check()
        audit = RunAudit(
            book_count=self.channel.book_count,
            free_count=self.channel.free_count,
            max_paths_bound=self.gateway.max_paths_bound,
            channel_clear=self.channel.all_idle(),
            events_executed=self.sched.executed,
        )
        return RunResult(
            counters=self.counters,
            records=self.records,
            audit=audit,
            devices=self.devices,
            vicinity=self.vicinity,
            areas=self.areas,
            seed=self.seed,
            config=self.cfg,
        )

    def _fill_breakdowns(self) -> None:
        def bucket() -> dict:
            return {"generated": 0, "suppressed": 0} | {f: 0 for f in _OUTCOME_FIELDS}

        per_sf: dict[int, dict] = {}
        per_area: dict[int, dict] = {}
        for i, dev in enumerate(self.devices):
            for key, table in ((dev.sf, per_sf), (self.areas[i], per_area)):
                b = table.setdefault(key, bucket())
                b["generated"] += self.mac.generated_per_device[i]
                b["suppressed"] += self.mac.suppressed_per_device[i]
        for rec in self.records:
            if rec.outcome is None:
                continue
            for key, table in ((rec.sf, per_sf), (self.areas[rec.device], per_area)):
                b = table.setdefault(key, bucket())
                b["sent"] += 1
                b[rec.outcome.value] += 1
        self.counters.per_sf = per_sf
        self.counters.per_area = per_area


def run_scenario(cfg: RunConfig, seed: int | None = None) -> RunResult:
    """Build the configured topology, run one scenario, return its result."""
    cfg.validate()
    effective_seed = cfg.seed if seed is None else seed
    if cfg.device_file is not None:
        topo = file_topology(cfg)
    else:
        topo = build_topology(cfg, RngStreams(effective_seed))
    sim = Simulation(
        cfg,
        topo.devices,
        topo.vicinity,
        areas=topo.areas,
        prx_dbm=topo.prx_dbm,
        seed=effective_seed,
    )
    return sim.run()
