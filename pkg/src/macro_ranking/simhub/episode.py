"""The macro/micro control loop and its accounting."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Literal

import numpy as np
import pandas as pd
from loguru import logger

from macro_ranking.bvn.decomposition import decompose, sample
from macro_ranking.controllers.base import Controller
from macro_ranking.core.exceptions import DecompositionError, SolverError, ValidationError
from macro_ranking.core.metrics import hinge, progress, utility
from macro_ranking.core.types import FloatArray, InterventionSpec, Permutation, ProgressState
from macro_ranking.simhub.datasets import ContextStream

ProgressMode = Literal["realized", "expected"]


@dataclass(frozen=True, eq=False)
class EpisodeResult:
    """Everything one episode produced, enough to recompute its objective."""

    controller: str
    mode: str
    spec: InterventionSpec
    constraint_ids: tuple[str, ...]
    utilities: FloatArray
    progress: FloatArray
    terminal: ProgressState
    violation: float
    objective: float
    permutations: tuple[Permutation, ...] | None = None
    states: tuple[dict[str, Any], ...] = ()

    @property
    def total_utility(self) -> float:
        return float(self.utilities.sum())

    def recompute_objective(self) -> float:
        terminal = self.progress.sum(axis=0)
        return float(self.utilities.sum()) - float(self.spec.phi @ hinge(self.spec.tau - terminal))

    def shortfall(self) -> FloatArray:
        """Unmet target per constraint, ``(tau - s_T)_+``."""
        return hinge(self.spec.tau - self.terminal.s)

    def summary(self) -> dict[str, Any]:
        row: dict[str, Any] = {
            "controller": self.controller,
            "mode": self.mode,
            "objective": self.objective,
            "utility": self.total_utility,
            "violation": self.violation,
            "shortfall": float(self.shortfall().sum()),
        }
        for cid, value in zip(self.constraint_ids, self.terminal.s, strict=True):
            row[f"terminal_{cid}"] = float(value)
        return row

    def trace_frame(self) -> pd.DataFrame:
        """Per-step utility, progress, cumulative progress, and the linear target."""
        T = self.utilities.shape[0]
        steps = np.arange(1, T + 1)
        frame = pd.DataFrame({"controller": self.controller, "step": steps, "utility": self.utilities})
        cumulative = np.cumsum(self.progress, axis=0)
        for i, cid in enumerate(self.constraint_ids):
            frame[f"progress_{cid}"] = self.progress[:, i]
            frame[f"cumulative_{cid}"] = cumulative[:, i]
            frame[f"target_{cid}"] = steps / self.spec.horizon_T * self.spec.tau[i]
        if self.permutations is not None:
            frame["ranking"] = [" ".join(str(j) for j in p.ranking) for p in self.permutations]
        return frame


def run_episode(
    controller: Controller,
    stream: ContextStream,
    spec: InterventionSpec,
    mode: ProgressMode = "expected",
    seed: int | None = None,
) -> EpisodeResult:
    """Run the control loop over ``stream``.

    Each step observes the context, asks the controller for a policy, samples
    a ranking from it in ``realized`` mode, and advances the progress state by
    the ranking's (or, in ``expected`` mode, the policy's) progress.

    Args:
        controller: Controller to drive; it is reset with the stream first
        stream: Contexts, one per step of the horizon
        spec: Intervention the episode is scored against
        mode: ``realized`` or ``expected`` progress accounting
        seed: Sampling seed for ``realized`` mode

    Returns:
        The episode result

    Raises:
        ValidationError: If the stream does not match the intervention
        SolverError: If a step cannot be solved; ``step`` names it
    """
    if mode not in ("realized", "expected"):
        raise ValidationError(f"unknown progress mode {mode!r}")
    if stream.T != spec.horizon_T:
        raise ValidationError(f"stream has {stream.T} steps but the intervention horizon is {spec.horizon_T}")
    if stream.n != spec.n or stream.m != spec.m:
        raise ValidationError(f"stream has n={stream.n}, m={stream.m}; intervention expects n={spec.n}, m={spec.m}")

    log = logger.bind(component="ControlLoop", controller=controller.label)
    rng = np.random.default_rng(seed)
    controller.reset(stream.contexts)

    state = ProgressState.zeros(spec.m)
    utilities = np.zeros(spec.horizon_T)
    deltas = np.zeros((spec.horizon_T, spec.m))
    permutations: list[Permutation] = []
    states: list[dict[str, Any]] = []

    for t, ctx in enumerate(stream.contexts, start=1):
        try:
            policy = controller.select(ctx, state, t)
            if mode == "realized":
                action = policy.to_permutation() if policy.is_permutation() else sample(decompose(policy), rng)
                permutations.append(action)
                utilities[t - 1] = utility(ctx, action, spec.weights)
                deltas[t - 1] = progress(ctx, action, spec.weights)
            else:
                utilities[t - 1] = utility(ctx, policy, spec.weights)
                deltas[t - 1] = progress(ctx, policy, spec.weights)
        except (SolverError, DecompositionError) as e:
            log.error(f"Step {t} failed: {e}")
            raise SolverError(e.message, step=t, cause=e) from e
        state = state.advance(deltas[t - 1])
        states.append(controller.snapshot())
        log.debug(f"t={t} utility={utilities[t - 1]:.4f} s={state.s}")

    violation = float(spec.phi @ hinge(spec.tau - deltas.sum(axis=0)))
    objective = float(utilities.sum()) - violation
    log.info(f"Episode finished: objective={objective:.4f} utility={utilities.sum():.4f} violation={violation:.4f}")
    return EpisodeResult(
        controller=controller.label,
        mode=mode,
        spec=spec,
        constraint_ids=stream.constraint_ids,
        utilities=utilities,
        progress=deltas,
        terminal=state,
        violation=violation,
        objective=objective,
        permutations=tuple(permutations) if mode == "realized" else None,
        states=tuple(states),
    )
