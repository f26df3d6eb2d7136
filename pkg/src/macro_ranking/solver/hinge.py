"""Single-step rankings under a hinge-penalized macro term."""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from macro_ranking.core.exceptions import ValidationError
from macro_ranking.core.types import FloatArray, RankingPolicy
from macro_ranking.solver.assignment import solve_assignment
from macro_ranking.solver.lp import birkhoff_equalities, run_linprog


@dataclass(frozen=True, eq=False)
class HingeProgram:
    """``max score . sigma - costs . (targets - W sigma^T e)_+`` over the polytope."""

    score: FloatArray
    hinge_targets: FloatArray
    hinge_costs: FloatArray
    W: FloatArray
    e: FloatArray

    def __post_init__(self) -> None:
        score = np.asarray(self.score, dtype=np.float64)
        targets = np.asarray(self.hinge_targets, dtype=np.float64)
        costs = np.asarray(self.hinge_costs, dtype=np.float64)
        W = np.asarray(self.W, dtype=np.float64)
        e = np.asarray(self.e, dtype=np.float64)
        n = score.shape[0]
        if score.ndim != 2 or score.shape != (n, n):
            raise ValidationError(f"hinge program needs a square score, got {score.shape}")
        if W.ndim != 2 or W.shape[1] != n or e.shape != (n,):
            raise ValidationError(f"hinge program: W {W.shape} and e {e.shape} do not match n={n}")
        if targets.shape != (W.shape[0],) or costs.shape != (W.shape[0],):
            raise ValidationError("hinge targets and costs must have one entry per row of W")
        if np.any(costs < 0):
            raise ValidationError("hinge costs must be nonnegative")
        for name, value in (("score", score), ("hinge_targets", targets), ("hinge_costs", costs), ("W", W), ("e", e)):
            object.__setattr__(self, name, value)

    @property
    def n(self) -> int:
        return int(self.score.shape[0])

    def macro(self, sigma: FloatArray) -> FloatArray:
        return self.W @ (sigma.T @ self.e)


def hinge_objective(prog: HingeProgram, policy: RankingPolicy | FloatArray) -> float:
    """Objective value of ``prog`` at a policy matrix."""
    sigma = policy.sigma if isinstance(policy, RankingPolicy) else np.asarray(policy, dtype=np.float64)
    slack = np.maximum(prog.hinge_targets - prog.macro(sigma), 0.0)
    return float(np.sum(prog.score * sigma) - prog.hinge_costs @ slack)


def solve_hinge_lp(prog: HingeProgram) -> RankingPolicy:
    """Optimal policy of a hinge program.

    Constraints whose cost is zero or whose target is already met by any
    ranking drop out; without any remaining, the problem is a plain
    assignment and the answer is a permutation. Otherwise an LP over the n^2
    policy entries plus one slack per active constraint is solved.
    """
    n = prog.n
    # With W, e >= 0 the macro term is nonnegative, so targets <= 0 never bind.
    active = np.flatnonzero((prog.hinge_costs > 0) & (prog.hinge_targets > 0))
    if active.size == 0:
        return solve_assignment(prog.score).as_policy()

    n_sigma = n * n
    n_vars = n_sigma + active.size
    c = np.concatenate([-prog.score.ravel(), prog.hinge_costs[active]])
    a_eq, b_eq = birkhoff_equalities(n, 1, n_vars)

    # -sum_{k,j} W[i,j] e[k] sigma[k,j] - z_i <= -target_i
    macro_rows = np.stack([-np.outer(prog.e, prog.W[i]).ravel() for i in active])
    a_ub = sp.hstack([sp.csr_matrix(macro_rows), -sp.identity(active.size, format="csr")], format="csr")
    b_ub = -prog.hinge_targets[active]

    x = run_linprog(c, a_ub, b_ub, a_eq, b_eq, label="hinge LP")
    return RankingPolicy.from_solver(x[:n_sigma].reshape(n, n))
