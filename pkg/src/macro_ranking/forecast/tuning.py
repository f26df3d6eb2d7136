"""Grid search of controller hyperparameters on a development stream."""

from __future__ import annotations

import itertools
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np
import pandas as pd
from loguru import logger

from macro_ranking.controllers.base import Controller, ControllerConfig
from macro_ranking.controllers.multipliers import OptimizerConfig
from macro_ranking.core.exceptions import ValidationError
from macro_ranking.core.types import InterventionSpec
from macro_ranking.simhub.datasets import ContextStream
from macro_ranking.simhub.episode import ProgressMode, run_episode

GridPoint = dict[str, Any]

GAINS = (1e-3, 1e-2, 1e-1, 1e0, 1e1, 1e2, 1e3)
ADAM_BETAS = (0.5, 0.9, 0.98)
ADAM_EPS = (1e-5, 1e-8)
FORECAST_COUNTS = (20, 50)


@dataclass(frozen=True)
class TuningResult:
    """Best grid point and the objective recorded for every point."""

    best: GridPoint
    best_objective: float
    records: tuple[dict[str, Any], ...]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(list(self.records))


def default_grid(kind: str) -> list[GridPoint]:
    """Default search grid for a controller kind.

    Multiplier controllers search gain and Adam constants; the predictive
    controller additionally searches the offline and online forecast counts
    with ``n_forecasts <= n_offline``. P-control only has a gain. Kinds
    without hyperparameters get a single empty point.
    """
    if kind == "p_control":
        return [{"gain": g} for g in GAINS]
    if kind == "stationary":
        return [{"gain": g, "beta": b, "eps": e} for g, b, e in itertools.product(GAINS, ADAM_BETAS, ADAM_EPS)]
    if kind == "predictive":
        return [
            {"gain": g, "beta": b, "eps": e, "n_offline": off, "n_forecasts": on}
            for g, b, e, off, on in itertools.product(GAINS, ADAM_BETAS, ADAM_EPS, FORECAST_COUNTS, FORECAST_COUNTS)
            if on <= off
        ]
    return [{}]


def is_tunable(grid: Sequence[GridPoint]) -> bool:
    """Whether any point of ``grid`` sets a hyperparameter; a single such point is still selected."""
    return any(grid)


def apply_grid_point(base: ControllerConfig, point: GridPoint) -> ControllerConfig:
    """``base`` with the hyperparameters of ``point`` substituted.

    ``beta``/``eps`` switch the optimizer to Adam; ``n_offline`` is read by
    the forecast pipeline, not by the controller.
    """
    update: dict[str, Any] = {}
    if "gain" in point:
        update["gain"] = float(point["gain"])
    if "beta" in point or "eps" in point:
        update["optimizer"] = OptimizerConfig(
            kind="adam",
            beta=float(point.get("beta", base.optimizer.beta)),
            eps=float(point.get("eps", base.optimizer.eps)),
        )
    if "n_forecasts" in point:
        update["n_forecasts"] = int(point["n_forecasts"])
    return ControllerConfig.model_validate({**base.model_dump(), **update})


def tune_gain(
    dev_stream: ContextStream,
    controller_factory: Callable[[GridPoint], Controller],
    grid: Sequence[GridPoint],
    spec: InterventionSpec,
    mode: ProgressMode = "expected",
    repeats: int = 1,
    seed: int = 0,
) -> TuningResult:
    """Simulate one episode per grid point and keep the best objective.

    Among equal objectives the later grid point wins. In ``realized`` mode
    each point is scored by the median over ``repeats`` seeded episodes.

    Args:
        dev_stream: Development contexts, one per step of ``spec``'s horizon
        controller_factory: Builds a fresh controller for a grid point
        grid: Non-empty list of grid points
        spec: Intervention to score against
        mode: Progress accounting of the simulated episodes
        repeats: Episodes per point in ``realized`` mode
        seed: Base seed; repeat ``k`` uses ``seed + k``

    Returns:
        The best point, its objective, and the full grid log
    """
    if not grid:
        raise ValidationError("tuning grid must not be empty")
    if repeats < 1:
        raise ValidationError("repeats must be at least 1")
    runs = repeats if mode == "realized" else 1

    records: list[dict[str, Any]] = []
    best_index, best_objective = -1, -np.inf
    for index, point in enumerate(grid):
        objectives = [
            run_episode(controller_factory(point), dev_stream, spec, mode=mode, seed=seed + k).objective
            for k in range(runs)
        ]
        objective = float(np.median(objectives))
        records.append({**point, "objective": objective})
        logger.debug(f"Grid point {index} {point}: objective {objective:.6f}")
        if objective >= best_objective:
            best_index, best_objective = index, objective

    best = dict(grid[best_index])
    logger.info(f"Best of {len(grid)} grid points: {best} with objective {best_objective:.6f}")
    return TuningResult(best=best, best_objective=best_objective, records=tuple(records))
