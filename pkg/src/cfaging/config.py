"""Declarative configuration for scenarios, hardware, and experiments.

All powers in config files are in dBm and are converted to linear mW
internally (x_linear = 10**(x_dbm/10)). Config files may be JSON or TOML.
"""

from __future__ import annotations

import json
import math

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Sequence


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


def dbm_to_mw(x_dbm: float) -> float:
    return 10.0 ** (x_dbm / 10.0)


def _as_per_entity(value, count: int, name: str) -> list[float]:
    """Broadcast a scalar to `count` entries, or validate a list of length `count`."""
    if isinstance(value, (int, float)):
        return [float(value)] * count
    value = list(value)
    if len(value) != count:
        raise ConfigError(f"{name}: expected scalar or list of length {count}, got {len(value)}")
    return [float(v) for v in value]


@dataclass(frozen=True)
class ScenarioConfig:
    """Network geometry, radio, and temporal parameters.

    Velocities and powers accept a scalar (broadcast to all UEs) or a
    per-UE list of length K.
    """

    M: int = 64
    N: int = 4
    K: int = 20
    area_side_m: float = 1000.0
    tau_c: int = 200
    tau_p: int = 10
    carrier_hz: float = 2e9
    sample_period_s: float = 66.7e-6
    ue_velocities_kmh: float | Sequence[float] = 54.0
    pilot_powers_dbm: float | Sequence[float] = 10.0
    data_powers_dbm: float | Sequence[float] = 10.0
    noise_dbm: float = -94.0
    asd_deg: float = 15.0
    antenna_spacing_wl: float = 0.5
    min_dist_m: float = 10.0
    iid_rayleigh: bool = False
    seed: int = 0

    def __post_init__(self):
        for name in ("M", "N", "K"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name}: must be >= 1")
        if not (1 <= self.tau_p < self.K):
            raise ConfigError(f"tau_p: must satisfy 1 <= tau_p < K, got tau_p={self.tau_p}, K={self.K}")
        if self.tau_c <= self.tau_p:
            raise ConfigError(f"tau_c: must exceed tau_p, got tau_c={self.tau_c}, tau_p={self.tau_p}")
        if self.area_side_m <= 0:
            raise ConfigError("area_side_m: must be positive")
        if self.carrier_hz <= 0:
            raise ConfigError("carrier_hz: must be positive")
        if self.sample_period_s <= 0:
            raise ConfigError("sample_period_s: must be positive")
        if self.asd_deg <= 0:
            raise ConfigError("asd_deg: must be positive")
        for name in ("pilot_powers_dbm", "data_powers_dbm", "noise_dbm"):
            vals = getattr(self, name)
            vals = [vals] if isinstance(vals, (int, float)) else vals
            if not all(math.isfinite(v) for v in vals):
                raise ConfigError(f"{name}: all powers must be finite")
        # trigger length validation
        self.velocities_kmh()
        self.pilot_powers_mw()
        self.data_powers_mw()

    # estimation happens one instant after the last pilot
    @property
    def estimation_instant(self) -> int:
        return self.tau_p + 1

    def velocities_kmh(self) -> list[float]:
        v = _as_per_entity(self.ue_velocities_kmh, self.K, "ue_velocities_kmh")
        if any(x < 0 for x in v):
            raise ConfigError("ue_velocities_kmh: velocities must be >= 0")
        return v

    def pilot_powers_mw(self) -> list[float]:
        return [dbm_to_mw(p) for p in _as_per_entity(self.pilot_powers_dbm, self.K, "pilot_powers_dbm")]

    def data_powers_mw(self) -> list[float]:
        return [dbm_to_mw(p) for p in _as_per_entity(self.data_powers_dbm, self.K, "data_powers_dbm")]

    @property
    def noise_mw(self) -> float:
        return dbm_to_mw(self.noise_dbm)


@dataclass(frozen=True)
class HardwareConfig:
    """Transceiver impairment levels.

    kappa_t / kappa_r are EVM values (scalar broadcast, or per-UE / per-AP
    lists). adc_bits accepts a scalar, a per-AP list, or a per-AP-per-antenna
    matrix; dac_bits a scalar or per-UE list. Bits may be the string "inf"
    (or float('inf')) for an ideal converter. dac_rho / adc_rho override the
    bit-depth lookup with explicit distortion factors when given.
    """

    kappa_t: float | Sequence[float] = 0.0
    kappa_r: float | Sequence[float] = 0.0
    dac_bits: Any = "inf"
    adc_bits: Any = "inf"
    dac_rho: Any = None
    adc_rho: Any = None


@dataclass(frozen=True)
class ExperimentSpec:
    """A seeded sweep over hardware/velocity/weight-scheme combinations."""

    scenario: ScenarioConfig
    trials: int = 20000
    outputs: str = "results"
    tolerance: float = 0.03
    sweep_velocities: tuple = (None,)       # None = use scenario velocities
    sweep_adc_bits: tuple = ("inf",)
    sweep_kappa: tuple = (0.0,)
    weight_schemes: tuple = ("lsfd",)
    workers: int = 0            # 0 = all available cores
    mc_batch: int = 1000

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials: must be >= 1")
        if self.workers < 0:
            raise ConfigError("workers: must be >= 0")
        if not (self.sweep_velocities and self.sweep_adc_bits
                and self.sweep_kappa and self.weight_schemes):
            raise ConfigError("sweep: parameter grid must be nonempty")
        for s in self.weight_schemes:
            if s not in ("lsfd", "sld"):
                raise ConfigError(f"weight_schemes: unknown scheme {s!r}")


def _load_raw(path: str | Path) -> dict:
    path = Path(path)
    data = path.read_bytes()
    if path.suffix.lower() == ".toml":
        return tomllib.loads(data.decode("utf-8"))
    return json.loads(data)


def _scenario_from_dict(d: dict) -> ScenarioConfig:
    known = {f.name for f in fields(ScenarioConfig)}
    unknown = set(d) - known
    if unknown:
        raise ConfigError(f"scenario: unknown field(s) {sorted(unknown)}")
    vals = dict(d)
    for key in ("ue_velocities_kmh", "pilot_powers_dbm", "data_powers_dbm"):
        if key in vals and isinstance(vals[key], list):
            vals[key] = tuple(vals[key])
    return ScenarioConfig(**vals)


def load_scenario_config(path: str | Path) -> ScenarioConfig:
    return _scenario_from_dict(_load_raw(path))


def load_experiment_spec(path: str | Path) -> ExperimentSpec:
    raw = _load_raw(path)
    if "scenario" not in raw:
        raise ConfigError("scenario: section missing from experiment spec")
    scenario = _scenario_from_dict(raw["scenario"])
    sweep = raw.get("sweep", {})
    kwargs: dict[str, Any] = {
        "scenario": scenario,
        "trials": raw.get("trials", 20000),
        "outputs": raw.get("outputs", "results"),
        "tolerance": raw.get("tolerance", 0.03),
        "workers": raw.get("workers", 0),
        "mc_batch": raw.get("mc_batch", 1000),
    }
    if "velocities" in sweep:
        kwargs["sweep_velocities"] = tuple(
            tuple(v) if isinstance(v, list) else v for v in sweep["velocities"]
        )
    if "adc_bits" in sweep:
        kwargs["sweep_adc_bits"] = tuple(sweep["adc_bits"])
    if "kappa" in sweep:
        kwargs["sweep_kappa"] = tuple(sweep["kappa"])
    if "weight_schemes" in sweep:
        kwargs["weight_schemes"] = tuple(sweep["weight_schemes"])
    return ExperimentSpec(**kwargs)
