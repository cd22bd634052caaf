"""YAML experiment configuration with a strict schema.

Example::

    experiment: delay-scan
    seed: 7
    output: {format: csv, path: scan.csv}
    ghz: {pump_sigma_fs: 84.9, coherence_sigma_fs: 250.0, mc_samples: 32}
    scan: {start_fs: -1500, stop_fs: 1500, points: 41}

All keys are optional except ``experiment``; unknown keys are rejected.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import List, Literal, Optional

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .errors import ConfigFileNotFound, MalformedConfig, OutOfRangeValue, UnknownConfigKey
from .experiments import GhzParams
from .rates import EFFICIENCY, PULSE_RATE, TARGET_FOURFOLD_PER_PULSE
from .sources import COHERENCE_TIME_FS, DEFAULT_PAIR_MEAN, FWHM_PER_SIGMA, PUMP_FWHM_FS, SourceParams

EXPERIMENTS = ("evolve", "histogram", "delay-scan", "control-scan", "entanglement-check", "rates")
_RANGE_ERRORS = {"greater_than", "greater_than_equal", "less_than", "less_than_equal", "literal_error", "finite_number"}


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class OutputConfig(_Strict):
    format: Literal["csv", "yaml"] = "csv"
    path: Optional[str] = None


class GhzConfig(_Strict):
    phase_rad: float = Field(math.pi, allow_inf_nan=False)
    delay_fs: float = Field(0.0, allow_inf_nan=False)
    pump_sigma_fs: float = Field(PUMP_FWHM_FS / FWHM_PER_SIGMA, ge=0.0, allow_inf_nan=False)
    coherence_sigma_fs: float = Field(COHERENCE_TIME_FS / 2.0, gt=0.0, allow_inf_nan=False)
    noise_w: float = Field(0.0, ge=0.0, le=1.0)
    mc_samples: int = Field(32, ge=1)
    convention: Literal["paper", "physical"] = "paper"
    theta1_deg: float = Field(45.0, allow_inf_nan=False)
    theta2_deg: float = Field(-45.0, allow_inf_nan=False)


class RatesConfig(_Strict):
    pulse_rate_hz: float = Field(PULSE_RATE, ge=0.0, allow_inf_nan=False)
    pair_mean: float = Field(DEFAULT_PAIR_MEAN, ge=0.0, allow_inf_nan=False)
    efficiency: float = Field(EFFICIENCY, ge=0.0, le=1.0)
    calibrate: Literal["none", "efficiency", "pair_mean"] = "efficiency"
    target_fourfold_per_pulse: float = Field(TARGET_FOURFOLD_PER_PULSE, gt=0.0, le=1.0)
    duration_s: float = Field(3600.0, gt=0.0, allow_inf_nan=False)
    method: Literal["thinned", "pulse"] = "thinned"


class ScanConfig(_Strict):
    delays_fs: Optional[List[float]] = None
    start_fs: float = Field(-1500.0, allow_inf_nan=False)
    stop_fs: float = Field(1500.0, allow_inf_nan=False)
    points: int = Field(41, ge=1)

    @model_validator(mode="after")
    def _check(self):
        if self.delays_fs is not None and not self.delays_fs:
            raise ValueError("delays_fs must not be empty")
        return self

    def delays(self) -> list:
        if self.delays_fs is not None:
            return [float(d) for d in self.delays_fs]
        if self.points == 1:
            return [float(self.start_fs)]
        return [float(x) for x in np.linspace(self.start_fs, self.stop_fs, self.points)]


class ExperimentConfig(_Strict):
    experiment: Literal["evolve", "histogram", "delay-scan", "control-scan", "entanglement-check", "rates"]
    seed: int = Field(0, ge=0)
    output: OutputConfig = OutputConfig()
    ghz: GhzConfig = GhzConfig()
    rates: RatesConfig = RatesConfig()
    scan: ScanConfig = ScanConfig()

    def ghz_params(self) -> GhzParams:
        g = self.ghz
        return GhzParams(
            source=SourceParams(phase=g.phase_rad, packet_sigma=g.coherence_sigma_fs, pump_sigma=g.pump_sigma_fs),
            delay=g.delay_fs,
            pump_sigma=g.pump_sigma_fs,
            coherence_sigma=g.coherence_sigma_fs,
            noise_w=g.noise_w,
            mc_samples=g.mc_samples,
            seed=self.seed,
            convention=g.convention,
        )


def _translate(exc: ValidationError):
    err = exc.errors()[0]
    key = ".".join(str(part) for part in err["loc"])
    kind = err["type"]
    if kind == "extra_forbidden":
        return UnknownConfigKey("unknown key", key)
    if kind in _RANGE_ERRORS:
        return OutOfRangeValue(f"value out of range ({err['msg']})", key)
    if kind == "missing":
        return MalformedConfig("required key missing", key)
    return MalformedConfig(err["msg"], key)


def parse_config(data) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise MalformedConfig("top level of the configuration must be a mapping")
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise _translate(exc) from None


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigFileNotFound("configuration file not found", str(path)) from None
    except OSError as exc:
        raise ConfigFileNotFound(f"cannot read configuration ({exc.strerror})", str(path)) from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise MalformedConfig(f"not a valid YAML document: {exc}", str(path)) from None
    return parse_config({} if data is None else data)


def dump_config(config: ExperimentConfig) -> str:
    """Serialise a config (defaults included) back to YAML."""
    return yaml.safe_dump(config.model_dump(mode="json"), sort_keys=False)


def with_overrides(config: ExperimentConfig, output=None, seed=None, fmt=None, points=None) -> ExperimentConfig:
    data = config.model_dump(mode="json")
    if output is not None:
        data["output"]["path"] = str(output)
    if fmt is not None:
        data["output"]["format"] = fmt
    if seed is not None:
        data["seed"] = seed
    if points is not None:
        data["scan"]["points"] = points
        data["scan"]["delays_fs"] = None
    return parse_config(data)
