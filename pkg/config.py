# config.py — experiment configuration: presets, JSON config files, env runtime knobs

import json
import logging
import os
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from errors import InvalidConfigError, RunStoreError

logger = logging.getLogger(__name__)

DEFAULT_MAX_WORKERS = 1
DEFAULT_EVAL_WORKERS = 1


class McsSettings(BaseModel):
    """Physical parameters of the UAV-aided sensing scenario (artifact defaults, not measured values)."""

    model_config = ConfigDict(extra="forbid")

    field_m: float = Field(1000.0, gt=0)
    altitude_m: float = Field(100.0, gt=0)
    g0: float = Field(1e-3, gt=0, description="Channel power gain at 1 m reference distance")
    alpha: float = Field(2.0, gt=0, description="Path-loss exponent")
    bandwidth_hz: float = Field(1e6, gt=0)
    noise_w: float = Field(1e-13, gt=0)
    data_bits: float = Field(5e6, gt=0)
    p_lo: float = Field(1e-3, gt=0)
    p_hi: float = Field(1.0, gt=0)
    delay_mode: Literal["sum", "max"] = "sum"
    instance_seed: int = 0

    @model_validator(mode="after")
    def _check_power_box(self) -> "McsSettings":
        if not self.p_lo < self.p_hi:
            raise ValueError("p_lo must be strictly below p_hi")
        return self


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    problem: Literal["mcs", "zdt1", "zdt2"] = "mcs"
    algorithm: Literal["attention", "lmocso"] = "attention"
    n: int = Field(300, ge=2)
    d: int = Field(100, ge=2)
    k: int = Field(5, ge=1)
    g: int = Field(10, ge=1)
    fe_budget: int = Field(50_000, ge=2)
    seeds: List[int] = Field(default_factory=lambda: list(range(1, 11)), min_length=1)
    trace_every: int = Field(1, ge=1)
    out_dir: str = "results"
    ref_point: float = Field(1.1, gt=1.0)
    reference_points: int = Field(200, ge=2)
    archive: bool = False
    pure_attention: bool = False
    query_generations: int = Field(1, ge=1)
    epsilon: float = Field(1e-12, gt=0)
    eta_c: float = Field(20.0, gt=0)
    eta_m: float = Field(20.0, gt=0)
    mcs: McsSettings = Field(default_factory=McsSettings)

    @model_validator(mode="after")
    def _check_relations(self) -> "ExperimentConfig":
        if self.k > self.n:
            raise ValueError("k must not exceed n")
        if self.g > self.d:
            raise ValueError("g must not exceed d")
        if self.fe_budget < self.d:
            raise ValueError("fe_budget must be at least d")
        return self

    def identity(self) -> Dict[str, Any]:
        """Fields that determine a run's outputs (out_dir and seeds excluded)."""
        echo = self.model_dump(mode="json")
        echo.pop("out_dir", None)
        echo.pop("seeds", None)
        return echo


PRESETS: Dict[str, Dict[str, Any]] = {
    # Attention offspring only: at n=300 the hybrid scheme spends 90% of each generation
    # on conventional offspring, which trail LMOCSO.
    "fig4": {
        "problem": "mcs",
        "n": 300,
        "d": 100,
        "fe_budget": 50_000,
        "k": 5,
        "g": 10,
        "pure_attention": True,
        "seeds": list(range(1, 11)),
    },
    "zdt1": {
        "problem": "zdt1",
        "n": 30,
        "d": 100,
        "fe_budget": 25_000,
        "k": 5,
        "g": 10,
        "seeds": list(range(1, 11)),
    },
}

PRESETS["mcs300"] = PRESETS["fig4"]


def _first_error_field(exc: ValidationError) -> Optional[str]:
    errors = exc.errors()
    if not errors:
        return None
    loc = [str(part) for part in errors[0].get("loc") or ()]
    return ".".join(loc) or None


def build_config(values: Dict[str, Any]) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(values)
    except ValidationError as exc:
        field = _first_error_field(exc)
        msg = exc.errors()[0].get("msg") if exc.errors() else str(exc)
        raise InvalidConfigError(f"invalid config field {field or '<root>'}: {msg}", field=field) from exc


def _merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    out = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def read_config_file(path: str) -> Dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise RunStoreError("cannot read config file", path) from exc
    except json.JSONDecodeError as exc:
        raise InvalidConfigError(f"config file is not valid JSON ({exc.msg}, line {exc.lineno})") from exc
    if not isinstance(raw, dict):
        raise InvalidConfigError("config file must contain a JSON object")
    return raw


def load_config(
    path: Optional[str] = None,
    *,
    preset: Optional[str] = None,
    overrides: Optional[Dict[str, Any]] = None,
) -> ExperimentConfig:
    """Resolve preset < config file < explicit overrides into a validated config."""
    values: Dict[str, Any] = {}
    if preset:
        if preset not in PRESETS:
            raise InvalidConfigError(f"unknown preset {preset!r}", field="preset")
        values = _merge(values, PRESETS[preset])
    if path:
        values = _merge(values, read_config_file(path))
    if overrides:
        values = _merge(values, {k: v for k, v in overrides.items() if v is not None})
    config = build_config(values)
    logger.debug("Resolved config preset=%s path=%s -> %s", preset, path, config.identity())
    return config


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name, "").strip()
    if not raw:
        return default
    try:
        return max(1, int(raw))
    except ValueError:
        logger.warning("Ignoring %s=%r (not an integer); using %s", name, raw, default)
        return default


def get_runtime_config() -> Dict[str, Any]:
    """Execution knobs that never change results: pool sizes and log level."""
    return {
        "max_workers": _env_int("MOEA_MAX_WORKERS", DEFAULT_MAX_WORKERS),
        "eval_workers": _env_int("MOEA_EVAL_WORKERS", DEFAULT_EVAL_WORKERS),
        "log_level": (os.environ.get("MOEA_LOG_LEVEL", "INFO").strip().upper() or "INFO"),
    }
