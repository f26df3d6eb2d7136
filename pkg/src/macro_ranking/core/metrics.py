"""Position weights, per-step utility and progress, and episode objective."""

from collections.abc import Sequence

import numpy as np

from macro_ranking.core.exceptions import ValidationError
from macro_ranking.core.types import (
    Context,
    FloatArray,
    InterventionSpec,
    Permutation,
    PositionWeights,
    ProgressState,
    RankingPolicy,
)


def _truncate(weights: FloatArray, cutoff_k: int | None) -> FloatArray:
    if cutoff_k is not None:
        if cutoff_k < 1:
            raise ValidationError("cutoff_k must be at least 1")
        weights[cutoff_k:] = 0.0
    return weights


def dcg_weights(n: int, cutoff_k: int | None = None) -> FloatArray:
    """Discounted cumulative gain weights ``1 / log2(k + 1)`` for positions 1..n.

    Args:
        n: Number of positions
        cutoff_k: Positions beyond this rank get weight 0

    Returns:
        Non-increasing weight vector of length n
    """
    if n < 1:
        raise ValidationError("dcg_weights needs at least one position")
    return _truncate(1.0 / np.log2(np.arange(2, n + 2, dtype=np.float64)), cutoff_k)


def rr_weights(n: int, cutoff_k: int | None = None) -> FloatArray:
    """Reciprocal-rank weights ``1 / k`` for positions 1..n."""
    if n < 1:
        raise ValidationError("rr_weights needs at least one position")
    return _truncate(1.0 / np.arange(1, n + 1, dtype=np.float64), cutoff_k)


def _as_matrix(policy: RankingPolicy | Permutation) -> FloatArray:
    if isinstance(policy, Permutation):
        return policy.to_matrix()
    return policy.sigma


def utility(ctx: Context, policy: RankingPolicy | Permutation, w: PositionWeights) -> float:
    """Micro-level utility ``sum_{k,j} sigma[k, j] * r[j] * u[k]``."""
    sigma = _as_matrix(policy)
    if sigma.shape != (ctx.n, ctx.n) or w.n != ctx.n:
        raise ValidationError(f"utility: policy {sigma.shape}, {ctx.n} items, {w.n} position weights")
    return float(w.u @ sigma @ ctx.r)


def progress(ctx: Context, policy: RankingPolicy | Permutation, w: PositionWeights) -> FloatArray:
    """Progress vector ``W @ (sigma.T @ e)``, one entry per intervention."""
    sigma = _as_matrix(policy)
    if sigma.shape != (ctx.n, ctx.n) or w.n != ctx.n:
        raise ValidationError(f"progress: policy {sigma.shape}, {ctx.n} items, {w.n} position weights")
    return ctx.W @ (sigma.T @ w.e)


def hinge(values: FloatArray) -> FloatArray:
    return np.maximum(values, 0.0)


def violation_cost(spec: InterventionSpec, terminal: ProgressState) -> float:
    """Macro-violation cost ``phi . (tau - s_T)_+``."""
    if terminal.s.shape != spec.tau.shape:
        raise ValidationError(f"state has {terminal.s.shape[0]} entries, intervention has {spec.m}")
    return float(spec.phi @ hinge(spec.tau - terminal.s))


def episode_objective(
    utilities: Sequence[float] | FloatArray, spec: InterventionSpec, terminal: ProgressState
) -> float:
    """Sum of per-step utilities minus the terminal violation cost."""
    values = np.asarray(utilities, dtype=np.float64)
    if values.shape != (spec.horizon_T,):
        raise ValidationError(f"expected {spec.horizon_T} utilities, got {values.shape[0] if values.ndim else 0}")
    return float(values.sum()) - violation_cost(spec, terminal)
