"""Stratified bootstrap of future context sequences from offline data."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from loguru import logger

from macro_ranking.core.exceptions import ForecastError, ValidationError
from macro_ranking.forecast.strata import stream_labels, timeline_labels
from macro_ranking.simhub.datasets import ContextStream


@dataclass(frozen=True, eq=False)
class ForecastPlan:
    """``B_off`` sampled sequences of dataset indices, one index per future step."""

    index_sequences: np.ndarray
    strata_key: str

    def __post_init__(self) -> None:
        indices = np.array(self.index_sequences, dtype=np.int64)
        if indices.ndim != 2 or indices.shape[0] < 1 or indices.shape[1] < 1:
            raise ValidationError(f"index sequences must be a non-empty (B, T) array, got shape {indices.shape}")
        indices.setflags(write=False)
        object.__setattr__(self, "index_sequences", indices)

    @property
    def B(self) -> int:
        return int(self.index_sequences.shape[0])

    @property
    def T(self) -> int:
        return int(self.index_sequences.shape[1])

    def check_dataset(self, dataset: ContextStream) -> None:
        if self.index_sequences.min() < 0 or self.index_sequences.max() >= dataset.T:
            raise ValidationError(f"plan references indices outside the dataset of {dataset.T} contexts")


def stratified_bootstrap(
    dataset: ContextStream,
    T: int,
    B_off: int,
    strata_key: str,
    seed: int,
    timeline: ContextStream | None = None,
) -> ForecastPlan:
    """Sample ``B_off`` futures of length ``T`` stratum by stratum.

    The index drawn for step ``t`` is uniform over the dataset contexts whose
    stratum label equals the label of ``t`` on the target timeline.

    Args:
        dataset: Offline contexts to resample
        T: Horizon of each sampled future
        B_off: Number of futures
        strata_key: Name of a strata preset, or ``stratum`` for stream labels
        seed: Random seed
        timeline: Target stream supplying step values and labels; steps
            ``1..T`` when omitted

    Returns:
        The reproducible plan

    Raises:
        ForecastError: If a timeline stratum has no dataset context
    """
    if B_off < 1 or T < 1:
        raise ValidationError(f"bootstrap needs B_off >= 1 and T >= 1, got {B_off} and {T}")
    if timeline is not None and timeline.T != T:
        raise ValidationError(f"timeline has {timeline.T} steps, expected {T}")

    pools: dict[str, list[int]] = {}
    for index, label in enumerate(stream_labels(dataset, strata_key)):
        pools.setdefault(label, []).append(index)
    targets = timeline_labels(timeline if timeline is not None else T, strata_key)

    rng = np.random.default_rng(seed)
    sequences = np.empty((B_off, T), dtype=np.int64)
    for t, label in enumerate(targets):
        pool = pools.get(label)
        if not pool:
            raise ForecastError(f"stratum {label!r} needed at step {t + 1} has no context in the dataset")
        sequences[:, t] = np.asarray(pool)[rng.integers(0, len(pool), size=B_off)]

    logger.debug(f"Bootstrapped {B_off} futures of {T} steps over {len(pools)} strata ({strata_key})")
    return ForecastPlan(index_sequences=sequences, strata_key=strata_key)
