"""Pure control laws ``(context, progress, t) -> ranking``.

Steps ``t`` are 1-based as in the control loop; the progress state passed in
is ``s_{t-1}``, the accumulation before step ``t``.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np
from numpy.typing import ArrayLike

from macro_ranking.controllers.multipliers import MultiplierState, OptimizerConfig, apply_update
from macro_ranking.core.exceptions import ForecastError, ValidationError
from macro_ranking.core.types import Context, FloatArray, InterventionSpec, Permutation, ProgressState, RankingPolicy
from macro_ranking.solver.assignment import linear_score, solve_assignment, sort_permutation
from macro_ranking.solver.hinge import HingeProgram, solve_hinge_lp
from macro_ranking.solver.horizon import solve_horizon_lp


def _check_step(t: int, spec: InterventionSpec) -> None:
    if not 1 <= t <= spec.horizon_T:
        raise ValidationError(f"step {t} outside 1..{spec.horizon_T}")


def boosted_ranking(ctx: Context, item_boost: FloatArray, spec: InterventionSpec) -> Permutation:
    """Best ranking for ``u_k r_j + e_k boost_j``.

    With ``u == e`` the score is rank one and sorting ``r + boost`` is exact.
    """
    u, e = spec.weights.u, spec.weights.e
    if np.array_equal(u, e):
        return sort_permutation(ctx.r + item_boost)
    return solve_assignment(linear_score(ctx.r, u, item_boost, e))


def unconstrained_select(ctx: Context) -> Permutation:
    """Items by descending relevance, lower index first among ties."""
    return sort_permutation(ctx.r)


def myopic_select(ctx: Context, state: ProgressState, t: int, spec: InterventionSpec) -> RankingPolicy:
    """Best single-step policy against the linearly scaled target ``(t/T) tau``."""
    _check_step(t, spec)
    spec.check_context(ctx)
    targets = (t / spec.horizon_T) * spec.tau - state.s
    prog = HingeProgram(
        score=linear_score(ctx.r, spec.weights.u),
        hinge_targets=targets,
        hinge_costs=spec.phi,
        W=ctx.W,
        e=spec.weights.e,
    )
    return solve_hinge_lp(prog)


def stationary_select(
    ctx: Context,
    state: ProgressState,
    t: int,
    spec: InterventionSpec,
    mult: MultiplierState,
    gamma: float,
    optimizer: OptimizerConfig | None = None,
) -> tuple[RankingPolicy, MultiplierState]:
    """Rank under clipped multipliers, then move them towards ``tau / T`` per step.

    The returned state keeps the raw multipliers; clipping to ``[0, phi]``
    happens only inside the argmax.
    """
    _check_step(t, spec)
    spec.check_context(ctx)
    boost = ctx.W.T @ mult.clipped(spec.phi)
    policy = boosted_ranking(ctx, boost, spec).as_policy()
    step_progress = ctx.W @ policy.item_exposure(spec.weights.e)
    ascent = spec.tau / spec.horizon_T - step_progress
    return policy, apply_update(mult, -ascent, gamma, optimizer or OptimizerConfig())


def p_control_select(ctx: Context, state: ProgressState, t: int, spec: InterventionSpec, gamma: float) -> Permutation:
    """Sort by relevance plus a boost proportional to the tracking error.

    The proportional term ``gamma * ((t-1)/T tau - s_{t-1})`` is clipped to
    ``[0, phi]`` as a multiplier, so with ``u == e`` this matches the
    stationary controller under plain gradient steps.
    """
    _check_step(t, spec)
    spec.check_context(ctx)
    tracking = ((t - 1) / spec.horizon_T) * spec.tau - state.s
    multiplier = np.clip(gamma * tracking, 0.0, spec.phi)
    return sort_permutation(ctx.r + ctx.W.T @ multiplier)


def predictive_select(
    ctx: Context,
    state: ProgressState,
    t: int,
    spec: InterventionSpec,
    mult: MultiplierState,
    forecasts: ArrayLike,
    gamma: float,
    optimizer: OptimizerConfig | None = None,
) -> tuple[RankingPolicy, MultiplierState]:
    """Rank under the average clipped multiplier over forecast futures.

    Args:
        ctx: Current context
        state: Progress before this step
        t: 1-based step
        spec: Intervention
        mult: One multiplier row per forecast, shape ``(B, m)``
        forecasts: Progress-to-go per forecast and step, shape ``(B, T, m)``
        gamma: Gain
        optimizer: Update rule, plain gradient steps by default

    Returns:
        The policy and the updated multipliers
    """
    _check_step(t, spec)
    spec.check_context(ctx)
    table = np.asarray(forecasts, dtype=np.float64)
    if table.ndim != 3 or table.shape[2] != spec.m:
        raise ForecastError(f"forecasts must have shape (B, T, {spec.m}), got {table.shape}")
    if table.shape[1] < t:
        raise ForecastError(f"no forecast for step {t}; table covers {table.shape[1]} steps")
    if mult.lam.shape != (table.shape[0], spec.m):
        raise ValidationError(f"multipliers {mult.lam.shape} do not match {table.shape[0]} forecasts")

    boost = ctx.W.T @ mult.clipped(spec.phi).mean(axis=0)
    policy = boosted_ranking(ctx, boost, spec).as_policy()
    step_progress = ctx.W @ policy.item_exposure(spec.weights.e)
    ascent = spec.tau[None, :] - state.s[None, :] - step_progress[None, :] - table[:, t - 1, :]
    return policy, apply_update(mult, -ascent, gamma, optimizer or OptimizerConfig())


def oracle_plan(contexts: Sequence[Context], spec: InterventionSpec) -> list[RankingPolicy]:
    """Per-step policies jointly optimal for the whole known stream."""
    if len(contexts) != spec.horizon_T:
        raise ValidationError(f"oracle needs {spec.horizon_T} contexts, got {len(contexts)}")
    solution = solve_horizon_lp([(1.0, ctx) for ctx in contexts], spec)
    return solution.term_policies
