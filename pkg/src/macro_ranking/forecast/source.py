"""Where the predictive controller's progress-to-go tables come from."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

from loguru import logger

from macro_ranking.controllers.policies import oracle_plan
from macro_ranking.core.exceptions import ConfigurationError
from macro_ranking.core.types import InterventionSpec
from macro_ranking.forecast.bootstrap import stratified_bootstrap
from macro_ranking.forecast.offline import (
    ProgressToGoTable,
    fit_offline_policy,
    progress_to_go,
    progress_to_go_from_plan,
)
from macro_ranking.simhub.datasets import ContextStream

ForecastMethod = Literal["bootstrap", "oracle"]

# Stream checksum, tau, phi, utility weights, exposure weights, horizon, offline count.
_CacheKey = tuple[str, bytes, bytes, bytes, bytes, int, int]


@dataclass(eq=False)
class ForecastSource:
    """Builds progress-to-go tables for a target stream and intervention.

    ``bootstrap`` resamples ``train`` stratum by stratum and rolls out the
    offline policy; ``oracle`` rolls out the jointly optimal plan of the
    target stream itself, i.e. exact knowledge of the future. Tables are
    cached per stream, intervention (position weights included), and offline
    sample count.
    """

    method: ForecastMethod = "bootstrap"
    train: ContextStream | None = None
    strata_key: str = "uniform"
    seed: int = 0
    _cache: dict[_CacheKey, ProgressToGoTable] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if self.method == "bootstrap" and self.train is None:
            raise ConfigurationError("bootstrap forecasts need a training stream")

    def table(self, stream: ContextStream, spec: InterventionSpec, n_offline: int, n_online: int) -> ProgressToGoTable:
        """``n_online`` forecasts for ``stream`` under ``spec``."""
        if n_online > n_offline:
            raise ConfigurationError(f"n_forecasts ({n_online}) cannot exceed n_offline ({n_offline})")
        weights = spec.weights
        key = (
            stream.checksum(),
            spec.tau.tobytes(),
            spec.phi.tobytes(),
            weights.u.tobytes(),
            weights.e.tobytes(),
            spec.horizon_T,
            n_offline,
        )
        if key not in self._cache:
            self._cache[key] = self._build(stream, spec, n_offline)
        return self._cache[key].head(n_online) if self.method == "bootstrap" else self._cache[key].tile(n_online)

    def _build(self, stream: ContextStream, spec: InterventionSpec, n_offline: int) -> ProgressToGoTable:
        if self.method == "oracle":
            logger.debug("Building exact progress-to-go from the oracle plan")
            return progress_to_go_from_plan(oracle_plan(list(stream.contexts), spec), stream, spec)
        assert self.train is not None
        plan = stratified_bootstrap(self.train, spec.horizon_T, n_offline, self.strata_key, self.seed, timeline=stream)
        offline = fit_offline_policy(plan, self.train, spec)
        return progress_to_go(offline, plan, self.train, spec, n_offline)
