"""Tests for the single-step hinge program."""

import itertools
from dataclasses import replace

import numpy as np
import pytest

from macro_ranking.core.exceptions import ValidationError
from macro_ranking.core.types import Permutation
from macro_ranking.solver.assignment import linear_score, solve_assignment
from macro_ranking.solver.hinge import HingeProgram, hinge_objective, solve_hinge_lp


def _random_program(rng: np.random.Generator, n: int, m: int) -> HingeProgram:
    u = np.sort(rng.uniform(size=n))[::-1]
    e = 1.0 / np.arange(1, n + 1)
    W = (rng.uniform(size=(m, n)) < 0.5).astype(float)
    return HingeProgram(
        score=linear_score(rng.uniform(size=n), u),
        hinge_targets=rng.uniform(0.0, 1.5, size=m),
        hinge_costs=rng.uniform(0.0, 3.0, size=m),
        W=W,
        e=e,
    )


def _vertex_values(prog: HingeProgram) -> list[tuple[float, np.ndarray]]:
    values = []
    for p in itertools.permutations(range(prog.n)):
        sigma = Permutation(p).to_matrix()
        values.append((hinge_objective(prog, sigma), sigma))
    return values


def _dual_bound(prog: HingeProgram, grid: int = 21) -> float:
    """Smallest Lagrangian bound over a grid of multipliers in [0, costs]."""
    best = np.inf
    axes = [np.linspace(0.0, c, grid) for c in prog.hinge_costs]
    for mu in itertools.product(*axes):
        mu = np.asarray(mu)
        boosted = prog.score + np.outer(prog.e, prog.W.T @ mu)
        perm = solve_assignment(boosted)
        value = float(np.sum(boosted * perm.to_matrix())) - float(mu @ prog.hinge_targets)
        best = min(best, value)
    return best


@pytest.mark.parametrize("n,m", [(3, 1), (4, 1), (4, 2), (5, 2)])
def test_lp_between_primal_and_dual(n, m, rng):
    """The LP value beats every permutation and mixture and stays below the dual bound."""
    for _ in range(5):
        prog = _random_program(rng, n, m)
        policy = solve_hinge_lp(prog)
        value = hinge_objective(prog, policy)
        vertices = sorted(_vertex_values(prog), key=lambda item: -item[0])
        assert value >= vertices[0][0] - 1e-8
        top = [sigma for _, sigma in vertices[:5]]
        for a, b in itertools.combinations(top, 2):
            for alpha in np.linspace(0.0, 1.0, 11):
                assert value >= hinge_objective(prog, alpha * a + (1 - alpha) * b) - 1e-8
        assert value <= _dual_bound(prog) + 1e-8


def test_shortfall_falls_as_costs_rise(rng):
    """Scaling every cost up never increases the cost-weighted unmet target."""
    for _ in range(20):
        base = replace(_random_program(rng, 5, 2), hinge_costs=rng.uniform(0.5, 3.0, size=2))
        shortfalls = []
        for scale in (0.01, 0.1, 1.0, 10.0, 100.0):
            prog = replace(base, hinge_costs=scale * base.hinge_costs)
            sigma = solve_hinge_lp(prog).sigma
            z = np.maximum(prog.hinge_targets - prog.W @ (sigma.T @ prog.e), 0.0)
            shortfalls.append(float(base.hinge_costs @ z))
        assert np.all(np.diff(shortfalls) <= 1e-6), shortfalls


def test_inactive_constraints_give_permutation():
    """Zero costs reduce the problem to an assignment."""
    prog = HingeProgram(
        score=linear_score(np.array([0.2, 0.9, 0.5]), np.array([1.0, 0.5, 0.2])),
        hinge_targets=np.array([5.0]),
        hinge_costs=np.array([0.0]),
        W=np.array([[1.0, 0.0, 0.0]]),
        e=np.array([1.0, 0.5, 0.2]),
    )
    policy = solve_hinge_lp(prog)
    assert policy.is_permutation()
    assert policy.to_permutation().ranking == (1, 2, 0)


def test_fractional_optimum():
    """A target between two rankings' progress is met exactly by a mixture."""
    # Two items; promoting item 1 costs 0.5 utility and earns 1.0 exposure.
    prog = HingeProgram(
        score=linear_score(np.array([1.0, 0.5]), np.array([1.0, 0.0])),
        hinge_targets=np.array([0.5]),
        hinge_costs=np.array([10.0]),
        W=np.array([[0.0, 1.0]]),
        e=np.array([1.0, 0.0]),
    )
    policy = solve_hinge_lp(prog)
    np.testing.assert_allclose(policy.sigma, [[0.5, 0.5], [0.5, 0.5]], atol=1e-8)
    assert hinge_objective(prog, policy) == pytest.approx(0.75, abs=1e-8)


def test_rejects_negative_costs():
    """Costs must be nonnegative."""
    with pytest.raises(ValidationError):
        HingeProgram(
            score=np.zeros((2, 2)),
            hinge_targets=np.ones(1),
            hinge_costs=-np.ones(1),
            W=np.ones((1, 2)),
            e=np.ones(2),
        )
