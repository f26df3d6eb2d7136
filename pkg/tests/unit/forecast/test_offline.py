"""Tests for the offline policy and progress-to-go tables."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from macro_ranking.controllers.policies import oracle_plan
from macro_ranking.core.exceptions import ConfigurationError, ForecastError
from macro_ranking.core.types import Context, InterventionSpec, PositionWeights
from macro_ranking.forecast.bootstrap import stratified_bootstrap
from macro_ranking.forecast.offline import (
    ProgressToGoTable,
    fit_offline_policy,
    progress_to_go,
    progress_to_go_from_plan,
)
from macro_ranking.forecast.source import ForecastSource
from macro_ranking.simhub.datasets import ContextStream
from macro_ranking.solver.horizon import solve_horizon_lp


def _constant_stream(T: int) -> ContextStream:
    W = np.array([[0.0, 1.0]])
    contexts = tuple(Context(t=t, r=np.array([0.9, 0.4]), W=W) for t in range(1, T + 1))
    return ContextStream(contexts=contexts, item_ids=("a", "b"), constraint_ids=("b_only",))


def _spec(T: int, tau: float, phi: float) -> InterventionSpec:
    return InterventionSpec(
        tau=np.array([tau]), phi=np.array([phi]), horizon_T=T, weights=PositionWeights.for_metrics(2)
    )


def test_suffix_sums():
    """A constant per-step progress p gives ``(T - t) p``."""
    T, p = 5, 0.5
    table = ProgressToGoTable.from_step_progress(np.full((1, T, 1), p))
    assert_allclose(table.values[0, :, 0], [(T - t) * p for t in range(1, T + 1)])


def test_table_csv_round_trip(tmp_path):
    """Tables survive writing and reading, in long format."""
    values = np.arange(2 * 3 * 2, dtype=float).reshape(2, 3, 2)
    table = ProgressToGoTable(values)
    frame = table.to_frame()
    assert list(frame.columns) == ["b", "t", "constraint_index", "value"]
    assert len(frame) == 12
    table.write_csv(tmp_path / "ptg.csv")
    assert_allclose(ProgressToGoTable.read_csv(tmp_path / "ptg.csv").values, values)


def test_head_and_tile():
    """``head`` keeps the first forecasts, ``tile`` repeats them."""
    table = ProgressToGoTable(np.arange(6, dtype=float).reshape(2, 3, 1))
    assert table.head(1).B == 1
    tiled = table.tile(5)
    assert tiled.B == 5
    assert_allclose(tiled.values[2], table.values[0])
    with pytest.raises(ForecastError):
        table.head(3)


def test_offline_policy_on_constant_stream():
    """Identical contexts everywhere: forecasts are exact suffix sums of the optimal plan."""
    T = 6
    dataset = _constant_stream(T)
    spec = _spec(T, tau=4.0, phi=10.0)
    plan = stratified_bootstrap(dataset, T, B_off=3, strata_key="uniform", seed=0)
    offline = fit_offline_policy(plan, dataset, spec)
    table = progress_to_go(offline, plan, dataset, spec, B_on=3)
    assert (table.B, table.T, table.m) == (3, T, 1)
    # Every future meets the target exactly, so step 1 plus what is still to come is tau.
    e = spec.weights.e
    first = [dataset[int(j)].W[0] @ offline[int(j)].item_exposure(e) for j in plan.index_sequences[:, 0]]
    assert_allclose(table.values[:, 0, 0] + np.array(first), 4.0, atol=1e-6)
    assert_allclose(table.values[:, -1, 0], 0.0)


def test_offline_policy_matches_monolithic_reference(rng, mocker):
    """The fitted policy reaches the optimum of the joint LP over all futures, whichever way it is solved."""
    T, n = 8, 4
    W = np.array([[0.0, 0.0, 1.0, 1.0]])
    contexts = tuple(Context(t=t, r=rng.uniform(size=n), W=W) for t in range(1, T + 1))
    dataset = ContextStream(contexts=contexts, item_ids=("a", "b", "c", "d"), constraint_ids=("cd",))
    spec = InterventionSpec(
        tau=np.array([1.25 * T]), phi=np.array([5.0]), horizon_T=T, weights=PositionWeights.for_metrics(n)
    )
    plan = stratified_bootstrap(dataset, T, B_off=2, strata_key="uniform", seed=3)
    indices = [int(j) for j in plan.index_sequences.ravel()]
    reference = solve_horizon_lp(
        [(1.0, dataset[j]) for j in indices],
        spec,
        shared_index=indices,
        sample_index=[b for b in range(plan.B) for _ in range(T)],
        strategy="monolithic",
    ).objective

    assert fit_offline_policy(plan, dataset, spec).objective == pytest.approx(reference, abs=1e-8)
    mocker.patch("macro_ranking.solver.horizon.settings.MONOLITHIC_LP_MAX_VARIABLES", 0)
    dual = fit_offline_policy(plan, dataset, spec).objective
    assert reference - 1e-3 * max(1.0, abs(reference)) <= dual <= reference + 1e-7


def test_progress_to_go_bounds(short_synthetic):
    """Asking for more online than offline forecasts fails."""
    stream, spec = short_synthetic
    plan = stratified_bootstrap(stream, spec.horizon_T, 2, "uniform", seed=0)
    offline = fit_offline_policy(plan, stream, spec)
    with pytest.raises(ForecastError):
        progress_to_go(offline, plan, stream, spec, B_on=3)


def test_exact_forecast_from_plan(toy_stream, toy_spec):
    """Forecasts from per-step policies are their suffix sums."""
    policies = oracle_plan(list(toy_stream.contexts), toy_spec)
    table = progress_to_go_from_plan(policies, toy_stream, toy_spec)
    steps = [ctx.W @ p.item_exposure(toy_spec.weights.e) for ctx, p in zip(toy_stream.contexts, policies)]
    assert table.values[0, 0, 0] == pytest.approx(sum(s[0] for s in steps[1:]))


class TestForecastSource:
    """Forecast tables by method."""

    def test_oracle_tiles(self, toy_stream, toy_spec):
        """Oracle forecasts repeat the single exact future."""
        table = ForecastSource(method="oracle").table(toy_stream, toy_spec, n_offline=3, n_online=3)
        assert table.B == 3
        assert_allclose(table.values[0], table.values[2])

    def test_bootstrap_caches(self, toy_stream, toy_spec):
        """A second request reuses the fitted table."""
        source = ForecastSource(method="bootstrap", train=toy_stream, seed=0)
        first = source.table(toy_stream, toy_spec, n_offline=2, n_online=2)
        second = source.table(toy_stream, toy_spec, n_offline=2, n_online=1)
        assert len(source._cache) == 1
        assert_allclose(second.values[0], first.values[0])

    def test_cache_tracks_position_weights(self, toy_stream, toy_spec):
        """A new cutoff builds a fresh table instead of reusing the old one."""
        source = ForecastSource(method="oracle")
        source.table(toy_stream, toy_spec, n_offline=1, n_online=1)
        cut = InterventionSpec(
            tau=toy_spec.tau, phi=toy_spec.phi, horizon_T=toy_spec.horizon_T, weights=PositionWeights.for_metrics(3, 1)
        )
        table = source.table(toy_stream, cut, n_offline=1, n_online=1)
        assert len(source._cache) == 2
        fresh = ForecastSource(method="oracle").table(toy_stream, cut, n_offline=1, n_online=1)
        assert_allclose(table.values, fresh.values)

    def test_online_bounded_by_offline(self, toy_stream, toy_spec):
        """n_online may not exceed n_offline."""
        with pytest.raises(ConfigurationError):
            ForecastSource(method="oracle").table(toy_stream, toy_spec, n_offline=1, n_online=2)

    def test_bootstrap_needs_training_data(self):
        """The bootstrap method needs a training stream."""
        with pytest.raises(ConfigurationError):
            ForecastSource(method="bootstrap")
