"""Deterministic discrete-event engine: virtual clock, event queue, RNG streams.

Time is kept as integer microseconds so that queue ordering is exact and
replays are bit-identical.  Events firing at the same microsecond execute in
insertion order (FIFO), which is what makes simultaneous channel claims
deterministic.
"""

from __future__ import annotations

import hashlib
import heapq
from typing import Callable

import numpy as np

US_PER_S = 1_000_000


def us_from_s(seconds: float) -> int:
    """Convert a duration in seconds to integer microseconds (nearest)."""
    return round(seconds * US_PER_S)


def s_from_us(ticks: int) -> float:
    return ticks / US_PER_S


class Scheduler:
    """Event queue ordered by (fire time, insertion sequence).

    The sequence counter breaks ties FIFO and doubles as the event id
    returned by :meth:`schedule`.
    """

    def __init__(self) -> None:
        self.now_us = 0
        self._heap: list[list] = []
        self._pending: dict[int, list] = {}
        self._seq = 0
        self.executed = 0

    def schedule(self, at_us: int, fn: Callable, *args) -> int:
        """Enqueue ``fn(*args)`` to run at ``at_us``; returns an event id.

        Scheduling in the past is a logic bug, not a recoverable condition.
        """
        if at_us < self.now_us:
            raise ValueError(
                f"cannot schedule event at {at_us} us: clock is at {self.now_us} us"
            )
        self._seq += 1
        entry = [at_us, self._seq, fn, args]
        self._pending[self._seq] = entry
        heapq.heappush(self._heap, entry)
        return self._seq

    def schedule_in(self, delay_us: int, fn: Callable, *args) -> int:
        return self.schedule(self.now_us + delay_us, fn, *args)

    def cancel(self, event_id: int) -> bool:
        """True iff the event existed and had not fired; it will never run."""
        entry = self._pending.pop(event_id, None)
        if entry is None:
            return False
        entry[2] = None
        return True

    def run_until(self, until_us: int) -> int:
        """Execute all events with fire time <= ``until_us`` in order.

        The clock ends at ``until_us`` even if the queue empties earlier;
        later events stay queued.  Returns the number of events executed.
        """
        heap = self._heap
        executed = 0
        while heap and heap[0][0] <= until_us:
            at_us, seq, fn, args = heapq.heappop(heap)
            if fn is None:  # cancelled
                continue
            del self._pending[seq]
            self.now_us = at_us
            fn(*args)
            executed += 1
        self.now_us = max(self.now_us, until_us)
        self.executed += executed
        return executed


def _label_key(label: str) -> int:
    # Stable across platforms and runs, unlike hash().
    return int.from_bytes(hashlib.sha256(label.encode()).digest()[:8], "big")


class RngStream:
    """One named, independently seeded random stream.

    Backed by numpy's PCG64, a documented, seedable generator whose output
    is fully specified, so (seed, stream_id, draw index) -> value holds
    across platforms.  Distinct labels under the same seed give distinct
    sequences.
    """

    def __init__(self, seed: int, label: str) -> None:
        self.label = label
        self._gen = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence([seed, _label_key(label)]))
        )

    def uniform(self) -> float:
        """Next value, uniform on [0, 1)."""
        return float(self._gen.random())

    def exponential(self, mean: float) -> float:
        return float(self._gen.exponential(mean))

    def normal(self, sigma: float) -> float:
        return float(self._gen.normal(0.0, sigma))


class RngStreams:
    """Factory of named streams for one run; one stream per concern."""

    def __init__(self, seed: int) -> None:
        self.seed = seed
        self._streams: dict[str, RngStream] = {}

    def stream(self, label: str) -> RngStream:
        if label not in self._streams:
            self._streams[label] = RngStream(self.seed, label)
        return self._streams[label]
