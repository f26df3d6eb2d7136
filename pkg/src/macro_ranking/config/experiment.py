"""Experiment configuration loaded from YAML.

Precedence: command-line flags override values from the file, which override
the model defaults. Everything is validated before any computation starts.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Literal

import yaml
from pydantic import BaseModel, Field, ValidationError as PydanticValidationError, field_validator, model_validator

from macro_ranking.config.settings import settings
from macro_ranking.controllers.base import ControllerConfig, ProgressMode
from macro_ranking.core.exceptions import ConfigurationError
from macro_ranking.forecast.strata import STRATA_KEYS
from macro_ranking.simhub.synthetic import SyntheticSpec


class DatasetConfig(BaseModel):
    """Where contexts come from."""

    source: Literal["synthetic", "csv"] = Field(default="synthetic")
    synthetic: SyntheticSpec = Field(default_factory=SyntheticSpec)
    contexts: Path | None = Field(default=None, description="Contexts CSV for the csv source")
    groups: Path | None = Field(default=None, description="Groups CSV for the csv source")
    shuffle: bool = Field(default=False, description="Serve the contexts in a seeded random order before splitting")

    @model_validator(mode="after")
    def csv_files_exist(self) -> DatasetConfig:
        if self.source != "csv":
            return self
        for name in ("contexts", "groups"):
            path = getattr(self, name)
            if path is None:
                raise ValueError(f"dataset.{name} is required for the csv source")
            if not path.exists():
                raise ValueError(f"dataset.{name} file not found: {path}")
        return self


class SplitConfig(BaseModel):
    """Chronological train/dev/test split; disabled means one stream serves all three."""

    enabled: bool = Field(default=False)
    ratios: tuple[float, float, float] = Field(default=(0.6, 0.2, 0.2))

    @field_validator("ratios")
    @classmethod
    def ratios_positive(cls, v: tuple[float, float, float]) -> tuple[float, float, float]:
        if any(r <= 0 for r in v):
            raise ValueError("split ratios must be positive")
        return v


class InterventionConfig(BaseModel):
    """Targets and violation costs.

    Targets come from the first of ``tau``, ``baseline_factors``, and
    ``target_share`` that is set. ``tau`` applies to the evaluation stream
    and is rescaled by horizon for the other splits.
    """

    phi: float = Field(default=100.0, ge=0.0, description="Violation cost used by run")
    phi_grid: list[float] = Field(default_factory=lambda: [0.01, 0.1, 1.0, 10.0, 100.0])
    tau: list[float] | None = Field(default=None)
    baseline_factors: float | list[float] | None = Field(default=None)
    target_share: float | None = Field(default=None, ge=0.0)
    cutoff_k: int | None = Field(default=None, ge=1, description="Metric cutoff; the synthetic spec's by default")

    @field_validator("phi_grid")
    @classmethod
    def grid_valid(cls, v: list[float]) -> list[float]:
        if not v:
            raise ValueError("phi_grid must not be empty")
        if any(phi < 0 for phi in v):
            raise ValueError("phi_grid values must be nonnegative")
        return v


class ForecastConfig(BaseModel):
    """Progress-to-go forecasts for the predictive controller."""

    method: Literal["bootstrap", "oracle"] = Field(default="bootstrap")
    n_offline: int = Field(default=20, ge=1, description="Bootstrap futures B_off")
    n_online: int = Field(default=20, ge=1, description="Forecasts written by the forecast command (B_on)")
    strata: str = Field(default="uniform")

    @field_validator("strata")
    @classmethod
    def strata_known(cls, v: str) -> str:
        if v not in STRATA_KEYS:
            raise ValueError(f"strata must be one of {list(STRATA_KEYS)}")
        return v

    @model_validator(mode="after")
    def online_within_offline(self) -> ForecastConfig:
        if self.n_online > self.n_offline:
            raise ValueError("n_online cannot exceed n_offline")
        return self


class TuningConfig(BaseModel):
    """Grid search on the development split."""

    enabled: bool = Field(default=False)
    mode: ProgressMode = Field(default="expected")
    repeats: int = Field(default=1, ge=1, description="Median-of-k episodes per point in realized mode")
    grids: dict[str, list[dict[str, Any]]] = Field(
        default_factory=dict, description="Per-kind grids overriding defaults"
    )


class OutputConfig(BaseModel):
    directory: Path = Field(default_factory=lambda: settings.OUTPUT_DIR)


def _default_controllers() -> list[ControllerConfig]:
    return [
        ControllerConfig(kind="unconstrained"),
        ControllerConfig(kind="myopic"),
        ControllerConfig(kind="stationary", gain=1.0),
        ControllerConfig(kind="predictive", gain=1.0),
        ControllerConfig(kind="oracle"),
    ]


class ExperimentConfig(BaseModel):
    """Top-level experiment configuration."""

    seed: int = Field(default_factory=lambda: settings.DEFAULT_SEED)
    progress_mode: ProgressMode | None = Field(default=None, description="Overrides every controller's mode")
    workers: int | None = Field(default=None, ge=1)
    dataset: DatasetConfig = Field(default_factory=DatasetConfig)
    split: SplitConfig = Field(default_factory=SplitConfig)
    intervention: InterventionConfig = Field(default_factory=InterventionConfig)
    controllers: list[ControllerConfig] = Field(default_factory=_default_controllers)
    forecast: ForecastConfig = Field(default_factory=ForecastConfig)
    tuning: TuningConfig = Field(default_factory=TuningConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)

    @model_validator(mode="after")
    def apply_progress_mode(self) -> ExperimentConfig:
        if self.progress_mode is not None:
            self.controllers = [c.model_copy(update={"progress_mode": self.progress_mode}) for c in self.controllers]
        if not self.controllers:
            raise ValueError("at least one controller is required")
        return self

    @model_validator(mode="after")
    def targets_defined(self) -> ExperimentConfig:
        iv = self.intervention
        if self.dataset.source == "csv" and iv.tau is None and iv.baseline_factors is None and iv.target_share is None:
            raise ValueError("csv datasets need intervention.tau, intervention.baseline_factors, or target_share")
        return self


def _merge(base: dict[str, Any], override: dict[str, Any]) -> dict[str, Any]:
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_experiment(path: str | Path | None = None, overrides: dict[str, Any] | None = None) -> ExperimentConfig:
    """Read, merge, and validate an experiment configuration.

    Args:
        path: YAML file, or None for defaults only
        overrides: Nested values from command-line flags

    Returns:
        The validated configuration

    Raises:
        ConfigurationError: If the file cannot be read or validation fails;
            the message names the offending field
    """
    raw: dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigurationError(f"config file not found: {path}")
        try:
            with open(path) as f:
                raw = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigurationError(f"cannot parse {path}: {e}", cause=e) from e
        if not isinstance(raw, dict):
            raise ConfigurationError(f"{path} must contain a mapping at the top level")
    raw = _merge(raw, {k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        return ExperimentConfig.model_validate(raw)
    except PydanticValidationError as e:
        problems = "; ".join(f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}" for err in e.errors())
        raise ConfigurationError(problems, cause=e) from e
