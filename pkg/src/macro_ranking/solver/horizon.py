"""Coupled multi-step problems: the oracle plan and the offline forecasting LP.

The objective over a list of weighted contexts, each assigned to a policy
slot and to a bootstrap sample ``b`` out of ``B``, is

    (1/B) sum_b [ sum_{t in b} w_t u_t(sigma_slot(t))
                  - phi . (tau - sum_{t in b} w_t c_t(sigma_slot(t)))_+ ]

Slots that are not shared and carry identical contexts within one sample are
merged first; the objective is linear in each step's policy, so the average
of their optimal policies is optimal and the merge is exact.
"""

from __future__ import annotations

from collections.abc import Hashable, Sequence
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from loguru import logger

from macro_ranking.config.settings import settings
from macro_ranking.core.exceptions import ValidationError
from macro_ranking.core.types import Context, FloatArray, InterventionSpec, Permutation, RankingPolicy
from macro_ranking.solver.assignment import linear_score, solve_assignment, sort_permutation
from macro_ranking.solver.lp import birkhoff_equalities, run_linprog

_log = logger.bind(component="HorizonSolver")


@dataclass(frozen=True, eq=False)
class HorizonSolution:
    """Optimal policies per slot, in order of first appearance, and the objective."""

    slot_keys: tuple[Hashable, ...]
    policies: tuple[RankingPolicy, ...]
    term_slots: tuple[int, ...]
    objective: float
    strategy: str

    def policy_for_term(self, index: int) -> RankingPolicy:
        return self.policies[self.term_slots[index]]

    def policy_for_slot(self, key: Hashable) -> RankingPolicy:
        return self.policies[self.slot_keys.index(key)]

    @property
    def term_policies(self) -> list[RankingPolicy]:
        return [self.policies[s] for s in self.term_slots]


@dataclass(eq=False)
class _Blocks:
    """Aggregated problem data: one block per distinct policy variable."""

    rho: FloatArray  # (S, n) utility weight per item, already divided by B
    load: FloatArray  # (S, B, m, n) macro weight per item and sample
    u: FloatArray
    e: FloatArray
    tau: FloatArray
    phi_per_sample: FloatArray  # (m,) phi / B
    active: list[tuple[int, int]]  # (sample, constraint) pairs that can bind

    @property
    def n_blocks(self) -> int:
        return int(self.rho.shape[0])

    @property
    def n(self) -> int:
        return int(self.u.shape[0])

    def score(self, s: int, mu: FloatArray | None) -> FloatArray:
        if mu is None:
            return linear_score(self.rho[s], self.u)
        boost = np.einsum("bi,bin->n", mu, self.load[s])
        return linear_score(self.rho[s], self.u, boost, self.e)

    def best_vertex(self, s: int, mu: FloatArray | None) -> Permutation:
        if np.array_equal(self.u, self.e):
            boost = self.rho[s] if mu is None else self.rho[s] + np.einsum("bi,bin->n", mu, self.load[s])
            return sort_permutation(boost)
        return solve_assignment(self.score(s, mu))

    def objective(self, sigmas: Sequence[FloatArray]) -> float:
        value = 0.0
        macro = np.zeros(self.load.shape[1:3])
        for s, sigma in enumerate(sigmas):
            value += float(self.u @ sigma @ self.rho[s])
            macro += self.load[s] @ (sigma.T @ self.e)
        shortfall = np.maximum(self.tau[None, :] - macro, 0.0)
        return value - float((shortfall * self.phi_per_sample[None, :]).sum())


def _build_blocks(
    contexts: Sequence[tuple[float, Context]],
    spec: InterventionSpec,
    shared_index: Sequence[Hashable] | None,
    sample_index: Sequence[int] | None,
) -> tuple[_Blocks, list[Hashable], list[int], list[int]]:
    if not contexts:
        raise ValidationError("horizon problem needs at least one context")
    n_terms = len(contexts)
    if shared_index is not None and len(shared_index) != n_terms:
        raise ValidationError("shared_index must have one entry per context")
    if sample_index is not None and len(sample_index) != n_terms:
        raise ValidationError("sample_index must have one entry per context")

    samples = [int(b) for b in sample_index] if sample_index is not None else [0] * n_terms
    sample_ids = sorted(set(samples))
    sample_pos = {b: i for i, b in enumerate(sample_ids)}
    n_samples = len(sample_ids)

    slot_keys: list[Hashable] = []
    slot_lookup: dict[Hashable, int] = {}
    term_slots: list[int] = []
    block_of_slot: list[int] = []
    block_lookup: dict[Hashable, int] = {}
    for idx, (weight, ctx) in enumerate(contexts):
        if weight <= 0:
            raise ValidationError(f"context weight must be positive, got {weight} at position {idx}")
        spec.check_context(ctx)
        key = shared_index[idx] if shared_index is not None else idx
        if key not in slot_lookup:
            slot_lookup[key] = len(slot_keys)
            slot_keys.append(key)
            block_key = ("slot", key) if shared_index is not None else ("ctx", samples[idx], ctx.content_key())
            if block_key not in block_lookup:
                block_lookup[block_key] = len(block_lookup)
            block_of_slot.append(block_lookup[block_key])
        term_slots.append(slot_lookup[key])

    n, m = spec.n, spec.m
    n_blocks = len(block_lookup)
    rho = np.zeros((n_blocks, n))
    load = np.zeros((n_blocks, n_samples, m, n))
    for idx, (weight, ctx) in enumerate(contexts):
        block = block_of_slot[term_slots[idx]]
        rho[block] += (weight / n_samples) * ctx.r
        load[block, sample_pos[samples[idx]]] += weight * ctx.W

    phi_per_sample = spec.phi / n_samples
    active = [(b, i) for b in range(n_samples) for i in range(m) if spec.phi[i] > 0 and spec.tau[i] > 0]
    blocks = _Blocks(
        rho=rho,
        load=load,
        u=spec.weights.u,
        e=spec.weights.e,
        tau=spec.tau,
        phi_per_sample=phi_per_sample,
        active=active,
    )
    return blocks, slot_keys, term_slots, block_of_slot


def _solve_monolithic(blocks: _Blocks) -> list[FloatArray]:
    n, n_blocks = blocks.n, blocks.n_blocks
    n_sigma = n_blocks * n * n
    n_vars = n_sigma + len(blocks.active)
    c = np.concatenate(
        [
            np.concatenate([-np.outer(blocks.u, blocks.rho[s]).ravel() for s in range(n_blocks)]),
            np.array([blocks.phi_per_sample[i] for _, i in blocks.active]),
        ]
    )
    a_eq, b_eq = birkhoff_equalities(n, n_blocks, n_vars)

    rows, cols, data = [], [], []
    for row, (b, i) in enumerate(blocks.active):
        for s in range(n_blocks):
            coeff = -np.outer(blocks.e, blocks.load[s, b, i]).ravel()
            nz = np.flatnonzero(coeff)
            rows.append(np.full(nz.size, row))
            cols.append(s * n * n + nz)
            data.append(coeff[nz])
        rows.append(np.array([row]))
        cols.append(np.array([n_sigma + row]))
        data.append(np.array([-1.0]))
    a_ub = sp.csr_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=(len(blocks.active), n_vars),
    )
    b_ub = -np.array([blocks.tau[i] for _, i in blocks.active])

    x = run_linprog(c, a_ub, b_ub, a_eq, b_eq, label="horizon LP")
    return [x[s * n * n : (s + 1) * n * n].reshape(n, n) for s in range(n_blocks)]


class _DualSearch:
    """Minimizes the Lagrangian dual over the box ``[0, phi/B]`` of active pairs."""

    def __init__(self, blocks: _Blocks, tol: float, max_iter: int = 300) -> None:
        self.blocks = blocks
        self.tol = tol
        self.max_iter = max_iter
        self.upper = np.array([blocks.phi_per_sample[i] for _, i in blocks.active])
        self.vertices: list[dict[tuple[int, ...], Permutation]] = [{} for _ in range(blocks.n_blocks)]
        self.evaluations = 0

    def _mu_matrix(self, point: FloatArray) -> FloatArray:
        mu = np.zeros(self.blocks.load.shape[1:3])
        for value, (b, i) in zip(point, self.blocks.active, strict=True):
            mu[b, i] = value
        return mu

    def evaluate(self, point: FloatArray) -> tuple[float, FloatArray]:
        """Dual value and a subgradient at ``point``; records argmax vertices."""
        self.evaluations += 1
        blocks = self.blocks
        mu = self._mu_matrix(point)
        value = -float(sum(point[k] * blocks.tau[i] for k, (_, i) in enumerate(blocks.active)))
        macro = np.zeros(blocks.load.shape[1:3])
        for s in range(blocks.n_blocks):
            perm = blocks.best_vertex(s, mu)
            self.vertices[s].setdefault(perm.position_of, perm)
            sigma = perm.to_matrix()
            exposure = sigma.T @ blocks.e
            value += float(blocks.u @ sigma @ blocks.rho[s])
            value += float(np.einsum("bi,bin,n->", mu, blocks.load[s], exposure))
            macro += blocks.load[s] @ exposure
        grad = np.array([macro[b, i] - blocks.tau[i] for b, i in blocks.active])
        return value, grad

    def _bisect(self, lo: float, hi: float, grad_at) -> float:
        width = max(hi - lo, 0.0)
        while hi - lo > self.tol * max(1.0, width):
            mid = 0.5 * (lo + hi)
            if grad_at(mid) > 0:
                hi = mid
            else:
                lo = mid
        return 0.5 * (lo + hi)

    def run(self) -> FloatArray:
        dims = len(self.blocks.active)
        self.evaluate(np.zeros(dims))
        self.evaluate(self.upper.copy())
        if dims == 1:
            best = self._bisect(0.0, self.upper[0], lambda x: self.evaluate(np.array([x]))[1][0])
            return np.array([best])
        if dims == 2:

            def inner(x0: float) -> float:
                return self._bisect(0.0, self.upper[1], lambda x1: self.evaluate(np.array([x0, x1]))[1][1])

            def outer_grad(x0: float) -> float:
                x1 = inner(x0)
                return self.evaluate(np.array([x0, x1]))[1][0]

            x0 = self._bisect(0.0, self.upper[0], outer_grad)
            return np.array([x0, inner(x0)])
        return self._projected_subgradient()

    def _projected_subgradient(self) -> FloatArray:
        point = 0.5 * self.upper
        radius = float(np.linalg.norm(self.upper)) / 2.0 or 1.0
        best_point, best_value = point.copy(), np.inf
        for k in range(self.max_iter):
            value, grad = self.evaluate(point)
            if value < best_value:
                best_point, best_value = point.copy(), value
            norm = float(np.linalg.norm(grad))
            if norm <= self.tol:
                break
            step = radius / np.sqrt(k + 1.0)
            if step < self.tol:
                break
            point = np.clip(point - step * grad / norm, 0.0, self.upper)
        return best_point


def _recover_primal(blocks: _Blocks, vertices: list[dict[tuple[int, ...], Permutation]]) -> list[FloatArray]:
    """Best mixture of the collected vertices, solved as a small coupled LP."""
    n_blocks = blocks.n_blocks
    vertex_lists = [list(v.values()) for v in vertices]
    offsets = np.cumsum([0] + [len(v) for v in vertex_lists])
    n_alpha = int(offsets[-1])
    n_vars = n_alpha + len(blocks.active)

    c = np.zeros(n_vars)
    exposures: list[list[FloatArray]] = []
    for s, verts in enumerate(vertex_lists):
        block_exposures = []
        for v, perm in enumerate(verts):
            sigma = perm.to_matrix()
            c[offsets[s] + v] = -float(blocks.u @ sigma @ blocks.rho[s])
            block_exposures.append(sigma.T @ blocks.e)
        exposures.append(block_exposures)
    for row, (_, i) in enumerate(blocks.active):
        c[n_alpha + row] = blocks.phi_per_sample[i]

    eq_rows = np.concatenate([np.full(len(verts), s) for s, verts in enumerate(vertex_lists)])
    a_eq = sp.csr_matrix((np.ones(n_alpha), (eq_rows, np.arange(n_alpha))), shape=(n_blocks, n_vars))
    b_eq = np.ones(n_blocks)

    a_ub = np.zeros((len(blocks.active), n_vars))
    for row, (b, i) in enumerate(blocks.active):
        for s, block_exposures in enumerate(exposures):
            for v, exposure in enumerate(block_exposures):
                a_ub[row, offsets[s] + v] = -float(blocks.load[s, b, i] @ exposure)
        a_ub[row, n_alpha + row] = -1.0
    b_ub = -np.array([blocks.tau[i] for _, i in blocks.active])

    x = run_linprog(c, sp.csr_matrix(a_ub), b_ub, a_eq, b_eq, label="primal recovery LP")
    sigmas = []
    for s, verts in enumerate(vertex_lists):
        weights = x[offsets[s] : offsets[s + 1]]
        sigmas.append(sum(w * perm.to_matrix() for w, perm in zip(weights, verts, strict=True)))
    return sigmas


def solve_horizon_lp(
    contexts: Sequence[tuple[float, Context]],
    spec: InterventionSpec,
    shared_index: Sequence[Hashable] | None = None,
    sample_index: Sequence[int] | None = None,
    strategy: str = "auto",
) -> HorizonSolution:
    """Jointly optimal policies for a known sequence of weighted contexts.

    Args:
        contexts: ``(weight, context)`` pairs
        spec: Targets, costs, and position weights
        shared_index: Optional slot key per context; contexts with equal keys
            share one policy. Without it every context has its own slot.
        sample_index: Optional bootstrap sample per context; each sample pays
            its own hinge and the objective is averaged over samples.
        strategy: ``"auto"``, ``"monolithic"``, or ``"dual"``

    Returns:
        The per-slot policies and the optimal objective value
    """
    blocks, slot_keys, term_slots, block_of_slot = _build_blocks(contexts, spec, shared_index, sample_index)
    n_vars = blocks.n_blocks * blocks.n * blocks.n
    if strategy not in {"auto", "monolithic", "dual"}:
        raise ValidationError(f"unknown horizon strategy {strategy!r}")

    if not blocks.active:
        chosen = "assignment"
        sigmas = [blocks.best_vertex(s, None).to_matrix() for s in range(blocks.n_blocks)]
    elif strategy == "monolithic" or (strategy == "auto" and n_vars <= settings.MONOLITHIC_LP_MAX_VARIABLES):
        chosen = "monolithic"
        sigmas = _solve_monolithic(blocks)
    else:
        chosen = "dual"
        search = _DualSearch(blocks, tol=settings.DUAL_TOL)
        point = search.run()
        search.evaluate(point)
        _log.debug(f"Dual search finished after {search.evaluations} evaluations at {point}")
        sigmas = _recover_primal(blocks, search.vertices)

    block_policies = [RankingPolicy.from_solver(sigma) for sigma in sigmas]
    objective = blocks.objective([p.sigma for p in block_policies])
    _log.info(
        f"Horizon problem solved ({chosen}): {len(contexts)} contexts, {len(slot_keys)} slots, "
        f"{blocks.n_blocks} blocks, objective {objective:.6f}"
    )
    return HorizonSolution(
        slot_keys=tuple(slot_keys),
        policies=tuple(block_policies[block_of_slot[s]] for s in range(len(slot_keys))),
        term_slots=tuple(term_slots),
        objective=objective,
        strategy=chosen,
    )


def horizon_objective(
    contexts: Sequence[tuple[float, Context]],
    spec: InterventionSpec,
    policies: Sequence[RankingPolicy],
    sample_index: Sequence[int] | None = None,
) -> float:
    """Objective of explicit per-context policies under the horizon formula."""
    if len(policies) != len(contexts):
        raise ValidationError("need one policy per context")
    samples = [int(b) for b in sample_index] if sample_index is not None else [0] * len(contexts)
    sample_ids = sorted(set(samples))
    n_samples = len(sample_ids)
    total = 0.0
    for b in sample_ids:
        macro = np.zeros(spec.m)
        for (weight, ctx), policy, sample in zip(contexts, policies, samples, strict=True):
            if sample != b:
                continue
            total += weight * float(spec.weights.u @ policy.sigma @ ctx.r) / n_samples
            macro += weight * (ctx.W @ policy.item_exposure(spec.weights.e))
        total -= float(spec.phi @ np.maximum(spec.tau - macro, 0.0)) / n_samples
    return total
