"""Domain types shared by every module.

All items and positions are 0-based internally. Policy matrices follow the
convention ``sigma[k, j] == 1`` meaning item ``j`` sits at position ``k``.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from macro_ranking.config.settings import settings
from macro_ranking.core.exceptions import ValidationError

STOCHASTIC_TOL = settings.STOCHASTIC_TOL
NEGATIVE_CLAMP_TOL = 1e-12

FloatArray = NDArray[np.float64]


def _frozen(values: ArrayLike, ndim: int, name: str) -> FloatArray:
    array = np.array(values, dtype=np.float64)
    if array.ndim != ndim:
        raise ValidationError(f"{name} must be {ndim}-dimensional, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise ValidationError(f"{name} contains non-finite values")
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Context:
    """One request: relevance per item and the intervention-association matrix."""

    t: int
    r: FloatArray
    W: FloatArray

    def __post_init__(self) -> None:
        r = _frozen(self.r, 1, "r")
        W = _frozen(self.W, 2, "W")
        if W.shape[1] != r.shape[0]:
            raise ValidationError(f"W has {W.shape[1]} columns but there are {r.shape[0]} items")
        if np.any(W < 0):
            raise ValidationError("W must be nonnegative")
        if np.any((r < 0) | (r > 1)):
            r = np.clip(r, 0.0, 1.0)
            r.setflags(write=False)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "W", W)

    @property
    def n(self) -> int:
        return int(self.r.shape[0])

    @property
    def m(self) -> int:
        return int(self.W.shape[0])

    def content_key(self) -> bytes:
        """Bytes identifying (r, W), used to merge identical contexts."""
        return self.r.tobytes() + self.W.tobytes()


@dataclass(frozen=True, eq=False)
class PositionWeights:
    """Micro (utility) and macro (exposure) weights per position."""

    u: FloatArray
    e: FloatArray
    cutoff_k: int | None = None

    def __post_init__(self) -> None:
        u = np.array(_frozen(self.u, 1, "u"))
        e = np.array(_frozen(self.e, 1, "e"))
        if u.shape != e.shape:
            raise ValidationError(f"u and e differ in length ({u.shape[0]} vs {e.shape[0]})")
        if np.any(e < 0):
            raise ValidationError("e must be nonnegative")
        if np.any(np.diff(u) > NEGATIVE_CLAMP_TOL):
            raise ValidationError("u must be non-increasing in position")
        if self.cutoff_k is not None:
            if self.cutoff_k < 1:
                raise ValidationError("cutoff_k must be at least 1")
            u[self.cutoff_k :] = 0.0
            e[self.cutoff_k :] = 0.0
        u.setflags(write=False)
        e.setflags(write=False)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "e", e)

    @property
    def n(self) -> int:
        return int(self.u.shape[0])

    @classmethod
    def for_metrics(cls, n: int, cutoff_k: int | None = None) -> PositionWeights:
        """DCG utility weights with reciprocal-rank exposure, the experiment default."""
        from macro_ranking.core.metrics import dcg_weights, rr_weights

        return cls(u=dcg_weights(n, cutoff_k), e=rr_weights(n, cutoff_k), cutoff_k=cutoff_k)


@dataclass(frozen=True)
class Permutation:
    """A ranking; ``position_of[j]`` is the position of item ``j``."""

    position_of: tuple[int, ...]

    def __post_init__(self) -> None:
        positions = tuple(int(p) for p in self.position_of)
        if sorted(positions) != list(range(len(positions))):
            raise ValidationError(f"not a bijection on {len(positions)} positions: {positions}")
        object.__setattr__(self, "position_of", positions)

    @property
    def n(self) -> int:
        return len(self.position_of)

    @classmethod
    def from_ranking(cls, ranking: Sequence[int]) -> Permutation:
        """Build from the item order, best position first."""
        position_of = [0] * len(ranking)
        for k, j in enumerate(ranking):
            position_of[int(j)] = k
        return cls(tuple(position_of))

    @property
    def ranking(self) -> tuple[int, ...]:
        """Items ordered by position."""
        order = [0] * self.n
        for j, k in enumerate(self.position_of):
            order[k] = j
        return tuple(order)

    def to_matrix(self) -> FloatArray:
        matrix = np.zeros((self.n, self.n))
        matrix[list(self.position_of), list(range(self.n))] = 1.0
        return matrix

    def as_policy(self) -> RankingPolicy:
        return RankingPolicy(self.to_matrix())


@dataclass(frozen=True, eq=False)
class RankingPolicy:
    """A doubly stochastic matrix over positions (rows) and items (columns)."""

    sigma: FloatArray

    def __post_init__(self) -> None:
        sigma = np.array(_frozen(self.sigma, 2, "sigma"))
        n_rows, n_cols = sigma.shape
        if n_rows != n_cols:
            raise ValidationError(f"policy must be square, got {sigma.shape}")
        if np.any(sigma < -NEGATIVE_CLAMP_TOL):
            raise ValidationError(f"policy has negative entries (min {sigma.min():.3e})")
        sigma[sigma < 0] = 0.0
        row_err = np.abs(sigma.sum(axis=1) - 1.0).max()
        col_err = np.abs(sigma.sum(axis=0) - 1.0).max()
        if max(row_err, col_err) > STOCHASTIC_TOL:
            raise ValidationError(f"policy is not doubly stochastic (row err {row_err:.3e}, col err {col_err:.3e})")
        sigma.setflags(write=False)
        object.__setattr__(self, "sigma", sigma)

    @property
    def n(self) -> int:
        return int(self.sigma.shape[0])

    @classmethod
    def from_permutation(cls, perm: Permutation) -> RankingPolicy:
        return perm.as_policy()

    @classmethod
    def from_solver(cls, matrix: ArrayLike, max_iter: int = 200) -> RankingPolicy:
        """Clean LP round-off and rebalance onto the Birkhoff polytope.

        Negative entries are zeroed and a few Sinkhorn sweeps restore unit row
        and column sums; the correction is of the order of the solver tolerance.
        """
        sigma = np.clip(np.array(matrix, dtype=np.float64), 0.0, None)
        sigma[sigma < NEGATIVE_CLAMP_TOL] = 0.0
        for _ in range(max_iter):
            sigma /= sigma.sum(axis=1, keepdims=True)
            sigma /= sigma.sum(axis=0, keepdims=True)
            if np.abs(sigma.sum(axis=1) - 1.0).max() < 1e-14:
                break
        return cls(sigma)

    def is_permutation(self, tol: float = STOCHASTIC_TOL) -> bool:
        return bool(np.all((np.abs(self.sigma) <= tol) | (np.abs(self.sigma - 1.0) <= tol)))

    def to_permutation(self, tol: float = STOCHASTIC_TOL) -> Permutation:
        if not self.is_permutation(tol):
            raise ValidationError("policy is not a permutation matrix")
        return Permutation(tuple(int(k) for k in np.argmax(self.sigma, axis=0)))

    def item_exposure(self, e: ArrayLike) -> FloatArray:
        """Expected position weight collected by each item."""
        return self.sigma.T @ np.asarray(e, dtype=np.float64)


@dataclass(frozen=True, eq=False)
class InterventionSpec:
    """Targets, violation costs, horizon, and position weights of one episode."""

    tau: FloatArray
    phi: FloatArray
    horizon_T: int
    weights: PositionWeights

    def __post_init__(self) -> None:
        tau = _frozen(self.tau, 1, "tau")
        phi = _frozen(self.phi, 1, "phi")
        if tau.shape != phi.shape:
            raise ValidationError(f"tau and phi differ in length ({tau.shape[0]} vs {phi.shape[0]})")
        if np.any(tau < 0):
            raise ValidationError("tau must be nonnegative")
        if np.any(phi < 0):
            raise ValidationError("phi must be nonnegative")
        if self.horizon_T < 1:
            raise ValidationError("horizon_T must be at least 1")
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "phi", phi)

    @property
    def m(self) -> int:
        return int(self.tau.shape[0])

    @property
    def n(self) -> int:
        return self.weights.n

    def with_phi(self, phi: float | ArrayLike) -> InterventionSpec:
        """Same intervention under a different violation-cost vector."""
        phi_vec = np.broadcast_to(np.asarray(phi, dtype=np.float64), self.tau.shape)
        return InterventionSpec(tau=self.tau, phi=phi_vec, horizon_T=self.horizon_T, weights=self.weights)

    def with_tau(self, tau: ArrayLike) -> InterventionSpec:
        return InterventionSpec(tau=np.asarray(tau), phi=self.phi, horizon_T=self.horizon_T, weights=self.weights)

    def check_context(self, ctx: Context) -> None:
        if ctx.n != self.n or ctx.m != self.m:
            raise ValidationError(f"context has n={ctx.n}, m={ctx.m}; intervention expects n={self.n}, m={self.m}")


@dataclass(frozen=True, eq=False)
class ProgressState:
    """Accumulated progress towards the targets after ``t_done`` steps."""

    s: FloatArray
    t_done: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "s", _frozen(self.s, 1, "s"))

    @classmethod
    def zeros(cls, m: int) -> ProgressState:
        return cls(s=np.zeros(m))

    def advance(self, delta: ArrayLike) -> ProgressState:
        """State after one more step contributing ``delta``."""
        step = _frozen(delta, 1, "delta")
        if step.shape != self.s.shape:
            raise ValidationError(f"progress has length {step.shape[0]}, state has {self.s.shape[0]}")
        return ProgressState(s=self.s + step, t_done=self.t_done + 1)

    @classmethod
    def replay(cls, deltas: Sequence[ArrayLike], m: int) -> ProgressState:
        state = cls.zeros(m)
        for delta in deltas:
            state = state.advance(delta)
        return state
