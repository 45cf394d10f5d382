"""Run counters, PRR computation, and CSV/trace emission."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

RESULT_COLUMNS = [
    "scenario",
    "seed",
    "mac",
    "n_devices",
    "sf_set",
    "p",
    "n_areas",
    "period_set",
    "generated",
    "sent",
    "suppressed",
    "received",
    "collided",
    "under_sensitivity",
    "no_path",
    "prr_generated",
    "prr_sent",
]

TRACE_COLUMNS = ["device", "sf", "air_start_s", "air_end_s", "prx_dbm", "outcome"]


@dataclass
class Counters:
    """Per-run packet tallies.

    ``sent`` counts transmissions whose air time completed within the run,
    so the outcome identity is exact even when the clock cuts a packet off
    mid-air; such packets count toward ``pending_at_end`` instead.
    """

    generated: int = 0
    sent: int = 0
    suppressed: int = 0
    received: int = 0
    collided: int = 0
    under_sensitivity: int = 0
    no_path: int = 0
    pending_at_end: int = 0
    per_sf: dict = field(default_factory=dict)
    per_area: dict = field(default_factory=dict)

    def check(self) -> None:
        if self.sent != self.received + self.collided + self.under_sensitivity + self.no_path:
            raise RuntimeError(f"counter identity violated: sent != sum of outcomes in {self}")
        if self.generated != self.sent + self.suppressed + self.pending_at_end:
            raise RuntimeError(f"counter identity violated: generated mismatch in {self}")


def compute_prr(c: Counters) -> tuple[float | None, float | None]:
    """(received/generated, received/sent); None marks an empty denominator."""
    c.check()
    prr_generated = c.received / c.generated if c.generated else None
    prr_sent = c.received / c.sent if c.sent else None
    return prr_generated, prr_sent


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def _row_sort_key(row: dict):
    seed = str(row["seed"])
    if seed.lstrip("-").isdigit():
        return (str(row["scenario"]), 0, int(seed), "")
    return (str(row["scenario"]), 1, 0, seed)  # summary rows after the runs


def write_csv(rows: list[dict], destination) -> None:
    """Result CSV: fixed columns, reals with 6 decimals, rows sorted by
    (scenario, seed) with summary rows after each scenario's runs."""
    ordered = sorted(rows, key=_row_sort_key)
    out = destination if hasattr(destination, "write") else io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(RESULT_COLUMNS)
    for row in ordered:
        writer.writerow([_fmt(row.get(col)) for col in RESULT_COLUMNS])
    if not hasattr(destination, "write"):
        Path(destination).write_text(out.getvalue())


def write_trace(records, destination) -> None:
    """Tab-separated transmission log, one record per started transmission.

    Packets still on air when the clock stops carry the outcome ``pending``.
    """
    lines = ["\t".join(TRACE_COLUMNS)]
    for rec in records:
        outcome = rec.outcome.value if rec.outcome is not None else "pending"
        lines.append(
            "\t".join(
                (
                    str(rec.device),
                    str(rec.sf),
                    f"{rec.air_start_us / 1e6:.6f}",
                    f"{rec.air_end_us / 1e6:.6f}",
                    f"{rec.prx_dbm:.6f}",
                    outcome,
                )
            )
        )
    text = "\n".join(lines) + "\n"
    if hasattr(destination, "write"):
        destination.write(text)
    else:
        Path(destination).write_text(text)
