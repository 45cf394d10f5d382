"""Scenario and sweep-grid configuration: a flat key=value document.

Lists use brace syntax ``{a,b,c}``; integer lists additionally accept range
sugar ``a..b``.  Unknown keys are errors so that typos cannot silently fall
back to defaults.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

from . import phy
from .topology import ClusterGeometry


class ConfigError(ValueError):
    """Invalid or malformed configuration; message names the key."""


@dataclass
class RunConfig:
    n_devices: int = 0
    sim_time_s: float = 3600.0
    mac: str = "pcsma"
    traffic: str = "periodic"
    period_set_s: tuple[float, ...] = (100.0, 200.0, 300.0, 400.0, 500.0)
    sf_set: tuple[int, ...] = (8,)
    p: float | tuple[float, ...] = 1.0
    n_areas: int = 1
    cluster_radius_m: float = 150.0
    ring_radius_m: float = 4000.0
    tx_power_dbm: float = phy.DEFAULT_TX_POWER_DBM
    bandwidth_hz: float = 125_000.0
    coding_rate: int = 1
    preamble_symbols: int = 8
    explicit_header: bool = True
    crc: bool = True
    low_data_rate_optimize: str = "auto"
    payload_bytes: int = 19
    carrier_hz: float = 868.1e6
    reference_loss_db: float = 7.7
    reference_distance_m: float = 1.0
    path_loss_exponent: float = 3.76
    shadowing_sigma_db: float = 0.0
    device_sensitivity_dbm: tuple[float, ...] = phy.DEFAULT_DEVICE_SENSITIVITY_DBM
    gateway_sensitivity_dbm: tuple[float, ...] = phy.DEFAULT_GATEWAY_SENSITIVITY_DBM
    gateway_paths: int = 8
    seed: int = 1
    offsets: str = "uniform"
    sensing_interval_s: float | None = None  # None: half the per-SF airtime
    offered_load: float = 1.0  # Poisson G, packets per packet-time
    duty_cycle_enforce: bool = False
    capture_effect: bool = False
    device_file: str | None = None

    def radio_params(self) -> phy.RadioParams:
        lowdr = {"auto": None, "on": True, "off": False}[self.low_data_rate_optimize]
        return phy.RadioParams(
            bandwidth_hz=self.bandwidth_hz,
            coding_rate=self.coding_rate,
            preamble_symbols=self.preamble_symbols,
            explicit_header=self.explicit_header,
            crc=self.crc,
            low_data_rate_optimize=lowdr,
            payload_bytes=self.payload_bytes,
            carrier_hz=self.carrier_hz,
        )

    def loss_params(self) -> phy.LossParams:
        return phy.LossParams(
            reference_loss_db=self.reference_loss_db,
            reference_distance_m=self.reference_distance_m,
            exponent=self.path_loss_exponent,
        )

    def sensitivity_table(self) -> phy.SensitivityTable:
        return phy.SensitivityTable(
            end_device=self.device_sensitivity_dbm,
            gateway=self.gateway_sensitivity_dbm,
        )

    def geometry(self) -> ClusterGeometry:
        return ClusterGeometry(
            n_areas=self.n_areas,
            cluster_radius_m=self.cluster_radius_m,
            ring_radius_m=self.ring_radius_m,
        )

    def validate(self) -> None:
        if self.n_devices < 1:
            raise ConfigError("n_devices is required and must be >= 1")
        if self.sim_time_s <= 0:
            raise ConfigError("sim_time_s must be positive")
        if self.mac not in ("pcsma", "aloha"):
            raise ConfigError(f"mac must be pcsma or aloha, got {self.mac!r}")
        if self.traffic not in ("periodic", "poisson"):
            raise ConfigError(f"traffic must be periodic or poisson, got {self.traffic!r}")
        if not self.period_set_s or any(t <= 0 for t in self.period_set_s):
            raise ConfigError("period_set_s must be non-empty with positive periods")
        if not self.sf_set:
            raise ConfigError("sf_set must be non-empty")
        if len(set(self.sf_set)) != len(self.sf_set):
            raise ConfigError("sf_set must not contain duplicates")
        for sf in self.sf_set:
            if not phy.SF_MIN <= sf <= phy.SF_MAX:
                raise ConfigError(f"sf_set entries must be in {phy.SF_MIN}..{phy.SF_MAX}, got {sf}")
        p_values = self.p if isinstance(self.p, tuple) else (self.p,)
        if isinstance(self.p, tuple) and len(self.p) != self.n_devices:
            raise ConfigError(
                f"per-device p needs exactly n_devices={self.n_devices} values, got {len(self.p)}"
            )
        for p in p_values:
            if not 0.0 < p <= 1.0:
                raise ConfigError(f"p must be in (0, 1], got {p}")
        if self.n_areas < 1:
            raise ConfigError("n_areas must be >= 1")
        if self.gateway_paths < 1:
            raise ConfigError("gateway_paths must be >= 1")
        if self.offsets not in ("zero", "uniform"):
            raise ConfigError(f"offsets must be zero or uniform, got {self.offsets!r}")
        if self.low_data_rate_optimize not in ("auto", "on", "off"):
            raise ConfigError("low_data_rate_optimize must be auto, on, or off")
        if self.sensing_interval_s is not None and self.sensing_interval_s <= 0:
            raise ConfigError("sensing_interval_s must be positive (or auto)")
        if self.shadowing_sigma_db < 0:
            raise ConfigError("shadowing_sigma_db must be >= 0")
        if self.traffic == "poisson":
            if self.offered_load <= 0:
                raise ConfigError("offered_load must be positive for poisson traffic")
            if len(self.sf_set) != 1:
                raise ConfigError("poisson traffic needs a single-SF sf_set (one packet-time)")
        if self.capture_effect:
            raise ConfigError("capture_effect is reserved and must stay false")
        try:
            self.radio_params()
        except ValueError as exc:
            raise ConfigError(f"radio parameters: {exc}") from None
        try:
            self.loss_params()
        except ValueError as exc:
            raise ConfigError(f"path-loss parameters: {exc}") from None
        try:
            self.sensitivity_table()
        except ValueError as exc:
            raise ConfigError(f"sensitivity tables: {exc}") from None


@dataclass
class SweepGrid:
    """Sweep dimensions; any missing dimension falls back to the base config."""

    device_counts: tuple[int, ...] | None = None
    p_values: tuple[float, ...] | None = None
    sf_sets: tuple[tuple[int, ...], ...] | None = None
    n_areas_values: tuple[int, ...] | None = None
    seeds: tuple[int, ...] = (1,)


def _split_list(value: str, key: str, lineno: int) -> list[str]:
    if not (value.startswith("{") and value.endswith("}")):
        raise ConfigError(f"line {lineno}: {key} expects a braced list like {{a,b,c}}")
    inner = value[1:-1].strip()
    if not inner:
        return []
    return [tok.strip() for tok in inner.split(",")]


def _parse_int(tok: str, key: str, lineno: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ConfigError(f"line {lineno}: {key}: {tok!r} is not an integer") from None


def _parse_float(tok: str, key: str, lineno: int) -> float:
    try:
        return float(tok)
    except ValueError:
        raise ConfigError(f"line {lineno}: {key}: {tok!r} is not a number") from None


def _parse_bool(tok: str, key: str, lineno: int) -> bool:
    low = tok.lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ConfigError(f"line {lineno}: {key}: expected true/false, got {tok!r}")


def _parse_int_list(value: str, key: str, lineno: int) -> tuple[int, ...]:
    out: list[int] = []
    for tok in _split_list(value, key, lineno):
        if ".." in tok:
            lo_s, hi_s = tok.split("..", 1)
            lo = _parse_int(lo_s.strip(), key, lineno)
            hi = _parse_int(hi_s.strip(), key, lineno)
            if hi < lo:
                raise ConfigError(f"line {lineno}: {key}: empty range {tok!r}")
            out.extend(range(lo, hi + 1))
        else:
            out.append(_parse_int(tok, key, lineno))
    return tuple(out)


def _parse_float_list(value: str, key: str, lineno: int) -> tuple[float, ...]:
    return tuple(_parse_float(tok, key, lineno) for tok in _split_list(value, key, lineno))


def _parse_p(value: str, key: str, lineno: int):
    if value.startswith("{"):
        return _parse_float_list(value, key, lineno)
    return _parse_float(value, key, lineno)


def _parse_sensing(value: str, key: str, lineno: int):
    if value.lower() == "auto":
        return None
    return _parse_float(value, key, lineno)


_CHOICES = {
    "mac": ("pcsma", "aloha"),
    "traffic": ("periodic", "poisson"),
    "offsets": ("zero", "uniform"),
    "low_data_rate_optimize": ("auto", "on", "off"),
}


def _parse_choice(value: str, key: str, lineno: int) -> str:
    low = value.lower()
    if low not in _CHOICES[key]:
        raise ConfigError(f"line {lineno}: {key}: expected one of {_CHOICES[key]}, got {value!r}")
    return low


_SCENARIO_KEYS = {
    "n_devices": _parse_int,
    "sim_time_s": _parse_float,
    "mac": _parse_choice,
    "traffic": _parse_choice,
    "period_set_s": _parse_float_list,
    "sf_set": _parse_int_list,
    "p": _parse_p,
    "n_areas": _parse_int,
    "cluster_radius_m": _parse_float,
    "ring_radius_m": _parse_float,
    "tx_power_dbm": _parse_float,
    "bandwidth_hz": _parse_float,
    "coding_rate": _parse_int,
    "preamble_symbols": _parse_int,
    "explicit_header": _parse_bool,
    "crc": _parse_bool,
    "low_data_rate_optimize": _parse_choice,
    "payload_bytes": _parse_int,
    "carrier_hz": _parse_float,
    "reference_loss_db": _parse_float,
    "reference_distance_m": _parse_float,
    "path_loss_exponent": _parse_float,
    "shadowing_sigma_db": _parse_float,
    "device_sensitivity_dbm": _parse_float_list,
    "gateway_sensitivity_dbm": _parse_float_list,
    "gateway_paths": _parse_int,
    "seed": _parse_int,
    "offsets": _parse_choice,
    "sensing_interval_s": _parse_sensing,
    "offered_load": _parse_float,
    "duty_cycle_enforce": _parse_bool,
    "capture_effect": _parse_bool,
    "device_file": lambda value, key, lineno: value,
}


def _iter_assignments(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw.strip()!r}")
        key, value = line.split("=", 1)
        yield lineno, key.strip(), value.strip()


def parse_config(text: str) -> RunConfig:
    """Parse and validate a scenario document; all defaults applied."""
    cfg = RunConfig()
    seen = set()
    for lineno, key, value in _iter_assignments(text):
        if key not in _SCENARIO_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in seen:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        seen.add(key)
        cfg = replace(cfg, **{key: _SCENARIO_KEYS[key](value, key, lineno)})
    if "n_devices" not in seen:
        raise ConfigError("missing required key n_devices")
    cfg.validate()
    return cfg


def load_config(path: str | Path) -> RunConfig:
    return parse_config(Path(path).read_text())


def _parse_sf_sets(value: str, key: str, lineno: int) -> tuple[tuple[int, ...], ...]:
    # Each cell is one SF set; multiple SFs inside a cell join with '+',
    # e.g. sf_sets = {8, 8+9+10}.
    sets = []
    for tok in _split_list(value, key, lineno):
        sets.append(tuple(_parse_int(part.strip(), key, lineno) for part in tok.split("+")))
    return tuple(sets)


_GRID_KEYS = {
    "device_counts": _parse_int_list,
    "p_values": _parse_float_list,
    "sf_sets": _parse_sf_sets,
    "n_areas_values": _parse_int_list,
    "seeds": _parse_int_list,
}


def parse_grid(text: str) -> SweepGrid:
    grid = SweepGrid()
    seen = set()
    for lineno, key, value in _iter_assignments(text):
        if key not in _GRID_KEYS:
            raise ConfigError(f"line {lineno}: unknown grid key {key!r}")
        if key in seen:
            raise ConfigError(f"line {lineno}: duplicate grid key {key!r}")
        seen.add(key)
        grid = replace(grid, **{key: _GRID_KEYS[key](value, key, lineno)})
    if not grid.seeds:
        raise ConfigError("seeds must be non-empty")
    return grid


def load_grid(path: str | Path) -> SweepGrid:
    return parse_grid(Path(path).read_text())
