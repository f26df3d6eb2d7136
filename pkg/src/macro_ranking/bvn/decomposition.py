"""Birkhoff-von Neumann decomposition of ranking policies and sampling from it.

Peeling is greedy: each round picks the perfect matching on the support of
the residual whose smallest entry is largest, subtracts that entry times the
permutation, and repeats until the remaining mass is negligible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from loguru import logger
from scipy.sparse.csgraph import maximum_bipartite_matching

from macro_ranking.config.settings import settings
from macro_ranking.core.exceptions import DecompositionError, ValidationError
from macro_ranking.core.types import FloatArray, Permutation, RankingPolicy
from macro_ranking.solver.assignment import solve_assignment

_WEIGHT_SUM_TOL = 1e-9


@dataclass(frozen=True)
class BvnDecomposition:
    """A convex combination ``sum_i weight_i * perm_i`` of rankings."""

    components: tuple[tuple[float, Permutation], ...]

    def __post_init__(self) -> None:
        if not self.components:
            raise ValidationError("decomposition needs at least one component")
        weights = np.array([w for w, _ in self.components])
        if np.any(weights <= 0):
            raise ValidationError("decomposition weights must be positive")
        if abs(weights.sum() - 1.0) > _WEIGHT_SUM_TOL:
            raise ValidationError(f"decomposition weights sum to {weights.sum():.12f}, not 1")
        if len({p.n for _, p in self.components}) != 1:
            raise ValidationError("decomposition mixes rankings of different sizes")

    @property
    def n(self) -> int:
        return self.components[0][1].n

    @property
    def weights(self) -> FloatArray:
        return np.array([w for w, _ in self.components])

    @property
    def permutations(self) -> list[Permutation]:
        return [p for _, p in self.components]

    def reconstruct(self) -> FloatArray:
        return sum((w * p.to_matrix() for w, p in self.components), start=np.zeros((self.n, self.n)))


def _has_perfect_matching(mask: np.ndarray) -> bool:
    matching = maximum_bipartite_matching(sp.csr_matrix(mask.astype(np.int8)), perm_type="column")
    return bool(np.all(matching >= 0))


def _bottleneck_matching(residual: FloatArray, eps: float) -> Permutation | None:
    """Perfect matching on entries above ``eps`` maximizing its smallest entry."""
    levels = np.unique(residual[residual > eps])
    if levels.size == 0 or not _has_perfect_matching(residual >= levels[0]):
        return None
    lo, hi = 0, levels.size - 1
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if _has_perfect_matching(residual >= levels[mid]):
            lo = mid
        else:
            hi = mid - 1
    allowed = residual >= levels[lo]
    # Any allowed matching scores 0; the assignment tie-break then prefers low item indices.
    return solve_assignment(np.where(allowed, 0.0, -float(residual.shape[0] + 1)))


def decompose(policy: RankingPolicy, eps: float | None = None) -> BvnDecomposition:
    """Decompose a doubly stochastic policy into weighted permutations.

    Args:
        policy: The policy to decompose
        eps: Entries at or below this value count as zero; mass left below
            ``n * eps`` is dropped and the weights are renormalized

    Returns:
        The decomposition, deterministic for a given input

    Raises:
        DecompositionError: If no perfect matching exists on the residual
            support while mass remains
    """
    eps = settings.BVN_EPS if eps is None else eps
    n = policy.n
    residual = np.array(policy.sigma, dtype=np.float64)
    remaining = float(residual.sum()) / n
    raw: list[tuple[float, Permutation]] = []
    max_rounds = n * n + 1

    while remaining > n * eps:
        if len(raw) >= max_rounds:
            raise DecompositionError(f"peeling did not finish after {max_rounds} rounds")
        perm = _bottleneck_matching(residual, eps)
        if perm is None:
            raise DecompositionError(f"no perfect matching on the residual support with mass {remaining:.3e} left")
        cells = (list(perm.position_of), list(range(n)))
        weight = min(float(residual[cells].min()), remaining)
        residual[cells] -= weight
        np.clip(residual, 0.0, None, out=residual)
        remaining = float(residual.sum()) / n
        raw.append((weight, perm))

    total = sum(w for w, _ in raw)
    components = tuple((w / total, p) for w, p in raw)
    logger.debug(f"Decomposed {n}x{n} policy into {len(components)} permutations, dropped mass {remaining:.2e}")
    return BvnDecomposition(components)


def sample(dec: BvnDecomposition, rng_seed: int | np.random.Generator) -> Permutation:
    """Draw one ranking, component ``i`` with probability ``weight_i``."""
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    weights = dec.weights
    index = int(rng.choice(len(dec.components), p=weights / weights.sum()))
    return dec.components[index][1]
