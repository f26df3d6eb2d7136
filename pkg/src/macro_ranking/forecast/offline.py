"""Offline contextual policy and progress-to-go forecasts.

The offline policy assigns one ranking policy to every dataset context that
appears in a bootstrap plan. It is fitted jointly over all sampled futures,
each paying its own hinge, so the problem size grows with the dataset rather
than with the horizon. Rolling that policy out along each future gives the
predicted progress still to come after every step.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd
from loguru import logger

from macro_ranking.core.exceptions import ForecastError, ValidationError
from macro_ranking.core.types import FloatArray, InterventionSpec, RankingPolicy
from macro_ranking.forecast.bootstrap import ForecastPlan
from macro_ranking.simhub.datasets import ContextStream
from macro_ranking.solver.horizon import solve_horizon_lp

TABLE_COLUMNS = ("b", "t", "constraint_index", "value")


@dataclass(frozen=True, eq=False)
class OfflinePolicy:
    """Policies per dataset index and the value of the coupled problem."""

    policies: dict[int, RankingPolicy]
    objective: float

    def __getitem__(self, index: int) -> RankingPolicy:
        try:
            return self.policies[index]
        except KeyError as e:
            raise ForecastError(f"no offline policy for dataset index {index}", cause=e) from e


@dataclass(frozen=True, eq=False)
class ProgressToGoTable:
    """``values[b, t-1]`` is the forecast progress over steps ``t+1..T`` of future ``b``."""

    values: FloatArray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 3 or min(values.shape) < 1:
            raise ValidationError(f"progress-to-go values must be a non-empty (B, T, m) array, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValidationError("progress-to-go values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def B(self) -> int:
        return int(self.values.shape[0])

    @property
    def T(self) -> int:
        return int(self.values.shape[1])

    @property
    def m(self) -> int:
        return int(self.values.shape[2])

    @classmethod
    def from_step_progress(cls, step_progress: FloatArray) -> ProgressToGoTable:
        """Suffix sums of per-step progress of shape ``(B, T, m)``; the last step gets 0."""
        steps = np.asarray(step_progress, dtype=np.float64)
        suffix = np.cumsum(steps[:, ::-1, :], axis=1)[:, ::-1, :]
        to_go = np.zeros_like(steps)
        to_go[:, :-1, :] = suffix[:, 1:, :]
        return cls(to_go)

    def head(self, B_on: int) -> ProgressToGoTable:
        if not 1 <= B_on <= self.B:
            raise ForecastError(f"requested {B_on} forecasts from a table of {self.B}")
        return ProgressToGoTable(self.values[:B_on])

    def tile(self, B: int) -> ProgressToGoTable:
        """The same forecasts repeated until there are ``B`` of them."""
        reps = -(-B // self.B)
        return ProgressToGoTable(np.concatenate([self.values] * reps, axis=0)[:B])

    def to_frame(self) -> pd.DataFrame:
        B, T, m = self.values.shape
        b, t, i = np.meshgrid(np.arange(B), np.arange(1, T + 1), np.arange(m), indexing="ij")
        return pd.DataFrame(
            {"b": b.ravel(), "t": t.ravel(), "constraint_index": i.ravel(), "value": self.values.ravel()}
        )

    def write_csv(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, lineterminator="\n")

    @classmethod
    def read_csv(cls, path: str | Path) -> ProgressToGoTable:
        path = Path(path)
        if not path.exists():
            raise ForecastError(f"progress-to-go file not found: {path}")
        frame = pd.read_csv(path)
        if tuple(frame.columns) != TABLE_COLUMNS:
            raise ForecastError(f"{path.name} header must be {','.join(TABLE_COLUMNS)}")
        B, T, m = int(frame["b"].max()) + 1, int(frame["t"].max()), int(frame["constraint_index"].max()) + 1
        if len(frame) != B * T * m:
            raise ForecastError(f"{path.name} has {len(frame)} rows, expected {B * T * m} for B={B}, T={T}, m={m}")
        values = np.zeros((B, T, m))
        values[frame["b"].to_numpy(), frame["t"].to_numpy() - 1, frame["constraint_index"].to_numpy()] = frame[
            "value"
        ].to_numpy()
        return cls(values)


def _check_plan(plan: ForecastPlan, dataset: ContextStream, spec: InterventionSpec) -> None:
    plan.check_dataset(dataset)
    if plan.T != spec.horizon_T:
        raise ValidationError(f"plan covers {plan.T} steps but the intervention horizon is {spec.horizon_T}")


def fit_offline_policy(plan: ForecastPlan, dataset: ContextStream, spec: InterventionSpec) -> OfflinePolicy:
    """Best policy per dataset index, shared across every future and step that sampled it.

    Args:
        plan: Bootstrap plan of dataset indices
        dataset: Offline contexts
        spec: Intervention; each sampled future pays its own hinge

    Returns:
        The offline policy and its average objective over the futures
    """
    _check_plan(plan, dataset, spec)
    indices = plan.index_sequences
    terms = [(1.0, dataset[int(j)]) for j in indices.ravel()]
    shared = [int(j) for j in indices.ravel()]
    samples = [b for b in range(plan.B) for _ in range(plan.T)]
    solution = solve_horizon_lp(terms, spec, shared_index=shared, sample_index=samples)
    policies = {int(key): policy for key, policy in zip(solution.slot_keys, solution.policies, strict=True)}
    logger.info(f"Fitted offline policy over {len(policies)} contexts and {plan.B} futures: {solution.objective:.4f}")
    return OfflinePolicy(policies=policies, objective=solution.objective)


def progress_to_go(
    policies: OfflinePolicy,
    plan: ForecastPlan,
    dataset: ContextStream,
    spec: InterventionSpec,
    B_on: int,
) -> ProgressToGoTable:
    """Forecast progress-to-go along the first ``B_on`` futures of ``plan``."""
    _check_plan(plan, dataset, spec)
    if not 1 <= B_on <= plan.B:
        raise ForecastError(f"B_on must lie in 1..{plan.B}, got {B_on}")
    e = spec.weights.e
    step_progress = np.zeros((B_on, plan.T, spec.m))
    for b in range(B_on):
        for t, j in enumerate(plan.index_sequences[b]):
            step_progress[b, t] = dataset[int(j)].W @ policies[int(j)].item_exposure(e)
    return ProgressToGoTable.from_step_progress(step_progress)


def progress_to_go_from_plan(
    policies: Sequence[RankingPolicy], stream: ContextStream, spec: InterventionSpec
) -> ProgressToGoTable:
    """Exact single-future forecast from per-step policies on a known stream."""
    if len(policies) != stream.T:
        raise ValidationError(f"need {stream.T} policies, got {len(policies)}")
    e = spec.weights.e
    steps = np.stack([ctx.W @ policy.item_exposure(e) for ctx, policy in zip(stream.contexts, policies, strict=True)])
    return ProgressToGoTable.from_step_progress(steps[None, :, :])
