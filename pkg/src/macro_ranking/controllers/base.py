"""Stateful controllers wrapping the pure control laws for one episode at a time."""

from __future__ import annotations

from abc import ABC, abstractmethod
from collections.abc import Sequence
from typing import Any, ClassVar, Literal

import numpy as np
from loguru import logger
from numpy.typing import ArrayLike
from pydantic import BaseModel, Field, model_validator

from macro_ranking.controllers.multipliers import MultiplierState, OptimizerConfig
from macro_ranking.controllers.policies import (
    myopic_select,
    oracle_plan,
    p_control_select,
    predictive_select,
    stationary_select,
    unconstrained_select,
)
from macro_ranking.core.exceptions import ConfigurationError, ForecastError, ValidationError
from macro_ranking.core.types import Context, FloatArray, InterventionSpec, ProgressState, RankingPolicy

ControllerKind = Literal["myopic", "stationary", "predictive", "p_control", "oracle", "unconstrained"]
ProgressMode = Literal["realized", "expected"]

_GAIN_KINDS = {"stationary", "predictive", "p_control"}


class ControllerConfig(BaseModel):
    """Configuration for one controller."""

    kind: ControllerKind = Field(..., description="Control law")
    name: str | None = Field(default=None, description="Label in result tables; defaults to kind")
    gain: float | None = Field(default=None, gt=0.0, description="Multiplier step size gamma")
    optimizer: OptimizerConfig = Field(default_factory=OptimizerConfig)
    n_forecasts: int = Field(default=20, ge=1, description="Progress-to-go sequences used online (B_on)")
    progress_mode: ProgressMode = Field(default="realized")

    @model_validator(mode="after")
    def gain_required(self) -> ControllerConfig:
        if self.kind in _GAIN_KINDS and self.gain is None:
            raise ValueError(f"controller kind {self.kind!r} requires a gain")
        return self

    @property
    def label(self) -> str:
        return self.name or self.kind


class Controller(ABC):
    """Base class for closed-loop ranking controllers.

    A controller is single-threaded and carries state across the steps of one
    episode; ``reset`` starts a new episode.
    """

    kind: ClassVar[str]

    def __init__(self, config: ControllerConfig, spec: InterventionSpec) -> None:
        self.config = config
        self.spec = spec
        self.logger = logger.bind(component=self.__class__.__name__)

    @property
    def label(self) -> str:
        return self.config.label

    def reset(self, contexts: Sequence[Context] | None = None) -> None:
        """Prepare for a new episode; ``contexts`` is only read by planners."""

    @abstractmethod
    def select(self, ctx: Context, state: ProgressState, t: int) -> RankingPolicy:
        """Policy for 1-based step ``t`` given the progress before it."""

    def snapshot(self) -> dict[str, Any]:
        """JSON-compatible state for checkpointing."""
        return {"kind": self.kind}

    def restore(self, snap: dict[str, Any]) -> None:
        if snap.get("kind") != self.kind:
            raise ValidationError(f"snapshot of {snap.get('kind')!r} cannot restore a {self.kind!r} controller")


class UnconstrainedController(Controller):
    kind = "unconstrained"

    def select(self, ctx: Context, state: ProgressState, t: int) -> RankingPolicy:
        return unconstrained_select(ctx).as_policy()


class MyopicController(Controller):
    kind = "myopic"

    def select(self, ctx: Context, state: ProgressState, t: int) -> RankingPolicy:
        return myopic_select(ctx, state, t, self.spec)


class PControlController(Controller):
    kind = "p_control"

    def select(self, ctx: Context, state: ProgressState, t: int) -> RankingPolicy:
        assert self.config.gain is not None
        return p_control_select(ctx, state, t, self.spec, self.config.gain).as_policy()


class _MultiplierController(Controller):
    """Shared reset and snapshot handling for controllers with multipliers."""

    def __init__(self, config: ControllerConfig, spec: InterventionSpec) -> None:
        super().__init__(config, spec)
        self.multipliers = MultiplierState.zeros(self._shape())

    @abstractmethod
    def _shape(self) -> tuple[int, ...]: ...

    def reset(self, contexts: Sequence[Context] | None = None) -> None:
        self.multipliers = MultiplierState.zeros(self._shape())

    def snapshot(self) -> dict[str, Any]:
        return {**super().snapshot(), **self.multipliers.to_dict()}

    def restore(self, snap: dict[str, Any]) -> None:
        super().restore(snap)
        state = MultiplierState.from_dict(snap)
        if state.lam.shape != self._shape():
            raise ValidationError(f"snapshot multipliers {state.lam.shape} do not match {self._shape()}")
        self.multipliers = state


class StationaryController(_MultiplierController):
    kind = "stationary"

    def _shape(self) -> tuple[int, ...]:
        return (self.spec.m,)

    def select(self, ctx: Context, state: ProgressState, t: int) -> RankingPolicy:
        assert self.config.gain is not None
        policy, self.multipliers = stationary_select(
            ctx, state, t, self.spec, self.multipliers, self.config.gain, self.config.optimizer
        )
        self.logger.debug(f"t={t} lambda={self.multipliers.lam}")
        return policy


class PredictiveController(_MultiplierController):
    kind = "predictive"

    def __init__(self, config: ControllerConfig, spec: InterventionSpec, forecasts: ArrayLike) -> None:
        table = np.asarray(forecasts, dtype=np.float64)
        if table.ndim != 3 or table.shape[1:] != (spec.horizon_T, spec.m):
            raise ForecastError(f"forecasts must have shape (B, {spec.horizon_T}, {spec.m}), got {table.shape}")
        if table.shape[0] < config.n_forecasts:
            raise ForecastError(f"need {config.n_forecasts} forecast sequences, got {table.shape[0]}")
        self.forecasts: FloatArray = table[: config.n_forecasts]
        super().__init__(config, spec)

    def _shape(self) -> tuple[int, ...]:
        return (self.forecasts.shape[0], self.spec.m)

    def select(self, ctx: Context, state: ProgressState, t: int) -> RankingPolicy:
        assert self.config.gain is not None
        policy, self.multipliers = predictive_select(
            ctx, state, t, self.spec, self.multipliers, self.forecasts, self.config.gain, self.config.optimizer
        )
        return policy


class OracleController(Controller):
    """Replays the jointly optimal plan for the stream given to ``reset``."""

    kind = "oracle"

    def __init__(self, config: ControllerConfig, spec: InterventionSpec) -> None:
        super().__init__(config, spec)
        self.plan: list[RankingPolicy] | None = None

    def reset(self, contexts: Sequence[Context] | None = None) -> None:
        if contexts is None:
            raise ConfigurationError("the oracle controller needs the full context stream at reset")
        self.plan = oracle_plan(list(contexts), self.spec)

    def select(self, ctx: Context, state: ProgressState, t: int) -> RankingPolicy:
        if self.plan is None:
            raise ConfigurationError("oracle controller used before reset")
        return self.plan[t - 1]
