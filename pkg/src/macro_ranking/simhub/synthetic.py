"""Seasonal synthetic stream: constant items plus groups relevant in turn."""

from __future__ import annotations

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, model_validator

from macro_ranking.core.types import Context, InterventionSpec, PositionWeights
from macro_ranking.simhub.datasets import ContextStream


class SyntheticSpec(BaseModel):
    """Shape of the synthetic stream.

    Item numbers in ``groups`` are 1-based. Items outside every group keep
    ``constant_relevance``; group ``g`` of ``k`` is in season during the
    ``g``-th of ``k`` equal slices of the horizon.
    """

    model_config = ConfigDict(frozen=True)

    n_items: int = Field(default=8, ge=2)
    horizon: int = Field(default=400, ge=1)
    groups: tuple[tuple[int, ...], ...] = Field(default=((5, 6), (7, 8)))
    constant_relevance: float = Field(default=1.0, ge=0.0, le=1.0)
    in_season_relevance: float = Field(default=0.8, ge=0.0, le=1.0)
    off_season_relevance: float = Field(default=0.05, ge=0.0, le=1.0)
    cutoff_k: int = Field(default=4, ge=1)
    noise: float = Field(default=0.0, ge=0.0, description="Std of Gaussian relevance noise, clipped to [0, 1]")
    target_share: float = Field(default=0.25, ge=0.0, description="Default target per group as a share of the horizon")

    @model_validator(mode="after")
    def groups_valid(self) -> SyntheticSpec:
        if not self.groups:
            raise ValueError("at least one group is required")
        members = [item for group in self.groups for item in group]
        if len(members) != len(set(members)):
            raise ValueError("groups must be disjoint")
        if any(not 1 <= item <= self.n_items for item in members):
            raise ValueError(f"group items must lie in 1..{self.n_items}")
        if any(not group for group in self.groups):
            raise ValueError("groups must not be empty")
        return self

    def season_of(self, t: int) -> int:
        """0-based index of the group in season at 1-based step ``t``."""
        return min((t - 1) * len(self.groups) // self.horizon, len(self.groups) - 1)


def generate_synthetic(spec: SyntheticSpec | None = None, seed: int = 0) -> ContextStream:
    """Deterministic seasonal stream; ``seed`` only matters when ``noise > 0``."""
    spec = spec or SyntheticSpec()
    n, k = spec.n_items, len(spec.groups)
    W = np.zeros((k, n))
    for g, group in enumerate(spec.groups):
        W[g, [item - 1 for item in group]] = 1.0

    rng = np.random.default_rng(seed)
    contexts = []
    for t in range(1, spec.horizon + 1):
        r = np.full(n, spec.constant_relevance)
        season = spec.season_of(t)
        for g, group in enumerate(spec.groups):
            r[[item - 1 for item in group]] = spec.in_season_relevance if g == season else spec.off_season_relevance
        if spec.noise > 0:
            r = np.clip(r + rng.normal(0.0, spec.noise, size=n), 0.0, 1.0)
        contexts.append(Context(t=t, r=r, W=W))

    stream = ContextStream(
        contexts=tuple(contexts),
        item_ids=tuple(str(j) for j in range(1, n + 1)),
        constraint_ids=tuple(f"group_{g}" for g in range(1, k + 1)),
    )
    logger.debug(f"Generated synthetic stream: {spec.horizon} steps, {n} items, {k} groups")
    return stream


def synthetic_intervention(spec: SyntheticSpec | None = None, phi: float = 1.0) -> InterventionSpec:
    """Default intervention: ``target_share * horizon`` exposure per group, DCG/RR weights at the cutoff."""
    spec = spec or SyntheticSpec()
    k = len(spec.groups)
    return InterventionSpec(
        tau=np.full(k, spec.target_share * spec.horizon),
        phi=np.full(k, phi),
        horizon_T=spec.horizon,
        weights=PositionWeights.for_metrics(spec.n_items, spec.cutoff_k),
    )
