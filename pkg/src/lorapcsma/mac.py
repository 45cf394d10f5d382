"""Per-device MAC: sensing over the vicinity set, FIFO claiming, persistence.

One :class:`PcsmaMac` instance owns the state of every device in a run, in
array form: the channel-state array (busy flags), the persistence table,
and each device's phase.  Both the p-CSMA behaviour and the pure-ALOHA
baseline live here; the gateway model calls back into
:meth:`PcsmaMac.finish_transmission` to free the channel at air-end.

Timing of the periodic traffic: a new generation is scheduled one period
after a transmission starts (a backed-off packet therefore shifts the
device's future schedule), and one period after a suppressed firing.  A
device holds at most one pending packet; firings that land while a packet
is pending or on air are counted as suppressed, never queued.
"""

from __future__ import annotations

import enum
from typing import TYPE_CHECKING

from .gateway import TxRecord
from .kernel import Scheduler, RngStream, US_PER_S

if TYPE_CHECKING:
    from .gateway import GatewayPhy
    from .metrics import Counters

DUTY_CYCLE_LIMIT = 0.01
DUTY_WINDOW_US = 3600 * US_PER_S


class Phase(enum.IntEnum):
    IDLE = 0
    TRANSMITTING = 1
    BACKOFF = 2


class ChannelStateArray:
    """One busy flag per device: 0 idle, 1 transmitting.

    Transitions follow idle -> occupied -> idle only; violating that is a
    logic bug and raises immediately.
    """

    def __init__(self, n_devices: int) -> None:
        if n_devices < 1:
            raise ValueError("need at least one device")
        self.flags = [0] * n_devices
        self.book_count = 0
        self.free_count = 0

    def book(self, device: int) -> None:
        if self.flags[device]:
            raise RuntimeError(f"device {device} booked while already transmitting")
        self.flags[device] = 1
        self.book_count += 1

    def free(self, device: int) -> None:
        if not self.flags[device]:
            raise RuntimeError(f"device {device} freed while already idle")
        self.flags[device] = 0
        self.free_count += 1

    def is_busy(self, device: int) -> bool:
        return bool(self.flags[device])

    def all_idle(self) -> bool:
        return not any(self.flags)


class PersistenceTable:
    """Per-device p-values in (0, 1]; updates apply from the next draw."""

    def __init__(self, values: list[float]) -> None:
        self.values = []
        for i, p in enumerate(values):
            self._check(p, i)
            self.values.append(float(p))

    @staticmethod
    def _check(p: float, device: int) -> None:
        if not 0.0 < p <= 1.0:
            raise ValueError(f"persistence for device {device} must be in (0, 1], got {p}")

    def get(self, device: int) -> float:
        return self.values[device]

    def update(self, device: int, p: float) -> None:
        self._check(p, device)
        self.values[device] = float(p)


def shall_it_pass(device: int, table: PersistenceTable, rng: RngStream) -> bool:
    """Persistence gate for reclaim attempts: pass iff rand < p(device)."""
    return rng.uniform() < table.get(device)


class PcsmaMac:
    def __init__(
        self,
        sched: Scheduler,
        channel: ChannelStateArray,
        ptable: PersistenceTable,
        neighbors: list[list[int]],
        counters: "Counters",
        records: list,
        persistence_rng: RngStream,
        *,
        sf: list[int],
        prx_dbm: list[float],
        toa_us: list[int],
        sense_us: list[int],
        period_us: list[int],
        periodic: bool = True,
        aloha: bool = False,
        duty_cycle_enforce: bool = False,
    ) -> None:
        n = len(neighbors)
        self.sched = sched
        self.channel = channel
        self.ptable = ptable
        self.neighbors = neighbors
        self.counters = counters
        self.records = records
        self.rng = persistence_rng
        self.sf = sf
        self.prx_dbm = prx_dbm
        self.toa_us = toa_us
        self.sense_us = sense_us
        self.period_us = period_us
        self.periodic = periodic
        self.aloha = aloha
        self.duty_cycle_enforce = duty_cycle_enforce
        self.gateway: "GatewayPhy | None" = None  # attached after construction

        self.phase = [Phase.IDLE] * n
        self.in_flight: list = [None] * n
        self.generated_per_device = [0] * n
        self.suppressed_per_device = [0] * n
        self._duty_log: list[list[tuple[int, int]]] = [[] for _ in range(n)]

    # -- sensing ---------------------------------------------------------

    def sense(self, device: int) -> bool:
        """True iff some device in the vicinity set is transmitting.

        The sensing device's own flag is ignored and the transmitters' SFs
        are not consulted (energy-style detection).
        """
        flags = self.channel.flags
        for j in self.neighbors[device]:
            if flags[j]:
                return True
        return False

    # -- generation entry points -----------------------------------------

    def generate(self, device: int) -> None:
        if self.aloha:
            self.aloha_on_generate(device)
        else:
            self.on_generate(device)

    def on_generate(self, device: int) -> None:
        """Periodic firing (or traffic arrival) under p-CSMA."""
        if self._count_or_suppress(device):
            return
        if self.sense(device):
            self.phase[device] = Phase.BACKOFF
            self.sched.schedule_in(self.sense_us[device], self.retry_claiming, device)
        else:
            # First attempt on an idle channel transmits unconditionally;
            # persistence gates only reclaim attempts.
            self._start_transmission(device)

    def aloha_on_generate(self, device: int) -> None:
        """ALOHA baseline: no sensing, no persistence, transmit directly."""
        if self._count_or_suppress(device):
            return
        self._start_transmission(device)

    def _count_or_suppress(self, device: int) -> bool:
        self.counters.generated += 1
        self.generated_per_device[device] += 1
        if self.phase[device] != Phase.IDLE:
            # One pending packet per device: drop the new one, keep the clock.
            self.counters.suppressed += 1
            self.suppressed_per_device[device] += 1
            self._schedule_next_generation(device)
            return True
        return False

    # -- back-off / reclaim ----------------------------------------------

    def retry_claiming(self, device: int) -> None:
        """Re-sense after one sensing interval; reclaim gated by persistence."""
        if self.sense(device):
            self.sched.schedule_in(self.sense_us[device], self.retry_claiming, device)
            return
        if shall_it_pass(device, self.ptable, self.rng):
            self._start_transmission(device)
        else:
            # Failed draw: wait one sensing interval, then sense and redraw.
            self.sched.schedule_in(self.sense_us[device], self.retry_claiming, device)

    # -- transmission ------------------------------------------------------

    def _start_transmission(self, device: int) -> None:
        now = self.sched.now_us
        if self.duty_cycle_enforce and self._duty_exceeded(device, now):
            self.counters.suppressed += 1
            self.suppressed_per_device[device] += 1
            self.phase[device] = Phase.IDLE
            self._schedule_next_generation(device)
            return
        self.channel.book(device)
        self.phase[device] = Phase.TRANSMITTING
        rec = TxRecord(
            device=device,
            sf=self.sf[device],
            air_start_us=now,
            air_end_us=now + self.toa_us[device],
            prx_dbm=self.prx_dbm[device],
        )
        self.records.append(rec)
        self.in_flight[device] = rec
        assert self.gateway is not None
        self.gateway.on_tx_start(rec)
        self.sched.schedule(rec.air_end_us, self.gateway.on_tx_end, rec)
        if self.duty_cycle_enforce:
            self._duty_log[device].append((now, self.toa_us[device]))
        self._schedule_next_generation(device)

    def finish_transmission(self, device: int) -> None:
        """Gateway callback at air-end; every outcome frees the channel."""
        self.channel.free(device)
        self.phase[device] = Phase.IDLE
        self.in_flight[device] = None

    def _schedule_next_generation(self, device: int) -> None:
        if self.periodic:
            self.sched.schedule_in(self.period_us[device], self.generate, device)

    # -- duty cycle guard (off by default) ---------------------------------

    def _duty_exceeded(self, device: int, now: int) -> bool:
        # Counts whole transmissions starting within the sliding hour.
        log = [(s, d) for s, d in self._duty_log[device] if s >= now - DUTY_WINDOW_US]
        self._duty_log[device] = log
        used = sum(d for _, d in log)
        return used + self.toa_us[device] > DUTY_CYCLE_LIMIT * DUTY_WINDOW_US


def create_channel_state(n_devices: int) -> ChannelStateArray:
    """All flags start idle."""
    return ChannelStateArray(n_devices)
