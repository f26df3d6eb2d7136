"""Baseline-relative targets and sweeps over the violation cost."""

from __future__ import annotations

from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import pandas as pd
from loguru import logger
from numpy.typing import ArrayLike
from scipy.stats import spearmanr

from macro_ranking.config.settings import settings
from macro_ranking.controllers.base import Controller, ControllerConfig
from macro_ranking.controllers.factory import build_controller
from macro_ranking.controllers.policies import unconstrained_select
from macro_ranking.core.exceptions import ConfigurationError, ValidationError
from macro_ranking.core.types import FloatArray, InterventionSpec
from macro_ranking.forecast.source import ForecastSource
from macro_ranking.forecast.tuning import GridPoint, apply_grid_point, default_grid, is_tunable, tune_gain
from macro_ranking.simhub.datasets import ContextStream
from macro_ranking.simhub.episode import EpisodeResult, ProgressMode, run_episode


def target_from_baseline(stream: ContextStream, spec: InterventionSpec, factors: float | ArrayLike) -> FloatArray:
    """Targets as multiples of the unconstrained controller's cumulative progress.

    Args:
        stream: Contexts the baseline is run on
        spec: Supplies the exposure weights
        factors: Non-negative factor per constraint, or one for all

    Returns:
        ``factors * E_base``
    """
    factor_vec = np.broadcast_to(np.asarray(factors, dtype=np.float64), (stream.m,))
    if np.any(factor_vec < 0):
        raise ValidationError("baseline factors must be nonnegative")
    baseline = np.zeros(stream.m)
    for ctx in stream.contexts:
        baseline += ctx.W @ unconstrained_select(ctx).as_policy().item_exposure(spec.weights.e)
    logger.debug(f"Baseline progress {baseline} on {stream.T} steps")
    return factor_vec * baseline


@dataclass(eq=False)
class TuningSetup:
    """Development stream and grids for per-(controller, phi) tuning."""

    dev_stream: ContextStream
    dev_spec: InterventionSpec
    grids: dict[str, list[GridPoint]] = field(default_factory=dict)
    mode: ProgressMode = "expected"
    repeats: int = 1

    def grid_for(self, kind: str) -> list[GridPoint]:
        return self.grids.get(kind) or default_grid(kind)


@dataclass(eq=False)
class _Cell:
    config: ControllerConfig
    phi: float
    stream: ContextStream
    spec: InterventionSpec
    mode: ProgressMode
    seed: int
    n_offline: int
    forecast_source: ForecastSource | None
    tuning: TuningSetup | None


def _forecasts(
    source: ForecastSource | None,
    stream: ContextStream,
    spec: InterventionSpec,
    config: ControllerConfig,
    n_offline: int,
) -> FloatArray | None:
    if config.kind != "predictive":
        return None
    if source is None:
        raise ConfigurationError("the predictive controller needs a forecast source")
    return source.table(stream, spec, n_offline, config.n_forecasts).values


def run_controller(
    config: ControllerConfig,
    stream: ContextStream,
    spec: InterventionSpec,
    mode: ProgressMode = "expected",
    seed: int = 0,
    forecast_source: ForecastSource | None = None,
    n_offline: int = 20,
) -> EpisodeResult:
    """Build ``config`` against ``spec`` and run one episode on ``stream``."""
    controller = build_controller(config, spec, _forecasts(forecast_source, stream, spec, config, n_offline))
    return run_episode(controller, stream, spec, mode=mode, seed=seed)


def grid_factory(
    base: ControllerConfig,
    stream: ContextStream,
    spec: InterventionSpec,
    forecast_source: ForecastSource | None = None,
    n_offline: int = 20,
) -> Callable[[GridPoint], Controller]:
    """Controller factory for tuning ``base`` on ``stream`` under ``spec``."""

    def factory(point: GridPoint) -> Controller:
        tuned = apply_grid_point(base, point)
        offline = int(point.get("n_offline", n_offline))
        return build_controller(tuned, spec, _forecasts(forecast_source, stream, spec, tuned, offline))

    return factory


def _run_cell(cell: _Cell) -> dict[str, Any]:
    spec = cell.spec.with_phi(cell.phi)
    config, n_offline, params = cell.config, cell.n_offline, {}

    if cell.tuning is not None and is_tunable(cell.tuning.grid_for(config.kind)):
        setup = cell.tuning
        dev_spec = setup.dev_spec.with_phi(cell.phi)
        factory = grid_factory(cell.config, setup.dev_stream, dev_spec, cell.forecast_source, cell.n_offline)
        result = tune_gain(
            setup.dev_stream,
            factory,
            setup.grid_for(config.kind),
            dev_spec,
            mode=setup.mode,
            repeats=setup.repeats,
            seed=cell.seed,
        )
        config = apply_grid_point(cell.config, result.best)
        n_offline = int(result.best.get("n_offline", cell.n_offline))
        params = {f"param_{k}": v for k, v in result.best.items()}

    controller = build_controller(config, spec, _forecasts(cell.forecast_source, cell.stream, spec, config, n_offline))
    episode = run_episode(controller, cell.stream, spec, mode=cell.mode, seed=cell.seed)
    return {**episode.summary(), "phi": cell.phi, **params}


def _check_trend(frame: pd.DataFrame) -> None:
    for label, group in frame.groupby("controller", sort=False):
        if group["phi"].nunique() < 3 or group["shortfall"].nunique() < 2:
            continue
        rho = float(spearmanr(group["phi"], group["shortfall"])[0])
        if rho > 0:
            logger.warning(f"Shortfall of {label} rises with phi (Spearman {rho:.3f})")


def sweep_phi(
    stream: ContextStream,
    spec: InterventionSpec,
    controllers: Sequence[ControllerConfig],
    phi_grid: Sequence[float],
    seed: int = 0,
    mode: ProgressMode | None = None,
    workers: int | None = None,
    forecast_source: ForecastSource | None = None,
    n_offline: int = 20,
    tuning: TuningSetup | None = None,
) -> pd.DataFrame:
    """One summary row per (controller, phi), each phi applied to every constraint.

    Cells run in a process pool when ``workers > 1``; rows come back ordered
    by controller as given, then by phi as given, whatever the schedule.

    Args:
        stream: Evaluation contexts
        spec: Intervention whose phi is replaced per cell
        controllers: Controllers to compare
        phi_grid: Non-empty list of violation costs
        seed: Sampling and tuning seed shared by all cells
        mode: Progress accounting for every cell; each controller's own mode when None
        workers: Process count, ``settings.WORKERS`` by default
        forecast_source: Required when a predictive controller is swept
        n_offline: Offline futures per forecast unless tuning picks another
        tuning: Enables per-cell tuning on a development stream

    Returns:
        The results frame
    """
    if not phi_grid:
        raise ValidationError("phi grid must not be empty")
    if not controllers:
        raise ValidationError("sweep needs at least one controller")
    cells = [
        _Cell(config, float(phi), stream, spec, mode or config.progress_mode, seed, n_offline, forecast_source, tuning)
        for config in controllers
        for phi in phi_grid
    ]
    workers = settings.WORKERS if workers is None else workers
    logger.info(f"Sweeping {len(controllers)} controllers over {len(phi_grid)} phi values with {workers} workers")

    if workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(cells))) as pool:
            rows = list(pool.map(_run_cell, cells))
    else:
        rows = [_run_cell(cell) for cell in cells]

    frame = pd.DataFrame(rows)
    leading = ["controller", "phi", "objective", "utility", "violation", "shortfall"]
    frame = frame[leading + [c for c in frame.columns if c not in leading]]
    _check_trend(frame)
    return frame
