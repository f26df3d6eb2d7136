"""Exact optimization over the Birkhoff polytope."""

from macro_ranking.solver.assignment import assignment_value, linear_score, solve_assignment, sort_permutation
from macro_ranking.solver.hinge import HingeProgram, hinge_objective, solve_hinge_lp
from macro_ranking.solver.horizon import HorizonSolution, horizon_objective, solve_horizon_lp

__all__ = [
    "HingeProgram",
    "HorizonSolution",
    "assignment_value",
    "hinge_objective",
    "horizon_objective",
    "linear_score",
    "solve_assignment",
    "solve_hinge_lp",
    "solve_horizon_lp",
    "sort_permutation",
]
