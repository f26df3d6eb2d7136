"""Linear objectives over rankings: exact assignment and the sorting shortcut."""

import numpy as np
from numpy.typing import ArrayLike
from scipy.optimize import linear_sum_assignment

from macro_ranking.core.exceptions import ValidationError
from macro_ranking.core.types import FloatArray, Permutation

# Relative size of the perturbation that makes lower item indices win ties.
_TIE_BREAK_SCALE = 1e-12


def _tie_break(n: int) -> FloatArray:
    # Rewards pairing early positions with low item indices; maximal for the
    # identity, so equal-score alternatives resolve towards index order.
    if n == 1:
        return np.zeros((1, 1))
    ramp = (n - 1 - np.arange(n, dtype=np.float64)) / (n - 1)
    return np.outer(ramp, ramp)


def solve_assignment(score: ArrayLike) -> Permutation:
    """Permutation maximizing ``sum_k score[k, item at k]``.

    Rows of ``score`` are positions, columns are items. Solved with the
    shortest augmenting path algorithm; ties resolve towards the lowest item
    index in the best position.

    Args:
        score: Square matrix of finite per-(position, item) scores

    Returns:
        An optimal permutation
    """
    matrix = np.asarray(score, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValidationError(f"assignment needs a square score matrix, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise ValidationError("assignment score contains non-finite values")
    n = matrix.shape[0]
    scale = max(1.0, float(np.abs(matrix).max(initial=0.0)))
    perturbed = matrix + (_TIE_BREAK_SCALE * scale / n) * _tie_break(n)
    rows, cols = linear_sum_assignment(perturbed, maximize=True)
    position_of = np.empty(n, dtype=int)
    position_of[cols] = rows
    return Permutation(tuple(int(k) for k in position_of))


def sort_permutation(item_scores: ArrayLike) -> Permutation:
    """Rank items by descending score, lower index first among ties.

    Optimal for rank-one scores ``item_scores[j] * w[k]`` with ``w``
    non-increasing.
    """
    scores = np.asarray(item_scores, dtype=np.float64)
    if scores.ndim != 1:
        raise ValidationError("sort_permutation expects a vector of item scores")
    return Permutation.from_ranking(np.argsort(-scores, kind="stable").tolist())


def assignment_value(score: ArrayLike, perm: Permutation) -> float:
    matrix = np.asarray(score, dtype=np.float64)
    return float(matrix[list(perm.position_of), list(range(perm.n))].sum())


def linear_score(
    r: ArrayLike, u: ArrayLike, item_boost: ArrayLike | None = None, e: ArrayLike | None = None
) -> FloatArray:
    """Score matrix ``u[k] r[j] + e[k] item_boost[j]`` used by the linear control laws."""
    score = np.outer(np.asarray(u, dtype=np.float64), np.asarray(r, dtype=np.float64))
    if item_boost is not None:
        if e is None:
            raise ValidationError("item_boost needs exposure weights e")
        score = score + np.outer(np.asarray(e, dtype=np.float64), np.asarray(item_boost, dtype=np.float64))
    return score
