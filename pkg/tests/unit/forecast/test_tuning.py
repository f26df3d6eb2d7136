"""Tests for hyperparameter grids and the tuning loop."""

import pytest

from macro_ranking.controllers.base import ControllerConfig
from macro_ranking.controllers.factory import build_controller
from macro_ranking.core.exceptions import ValidationError
from macro_ranking.forecast.tuning import apply_grid_point, default_grid, is_tunable, tune_gain
from macro_ranking.simhub.episode import run_episode


def test_default_grid_sizes():
    """Gain-only, gain plus Adam, and gain plus Adam plus forecast counts."""
    assert len(default_grid("p_control")) == 7
    assert len(default_grid("stationary")) == 42
    predictive = default_grid("predictive")
    assert len(predictive) == 126
    assert all(point["n_forecasts"] <= point["n_offline"] for point in predictive)
    assert default_grid("oracle") == [{}]


def test_apply_grid_point_switches_to_adam():
    """Adam constants in a point select the Adam optimizer."""
    base = ControllerConfig(kind="predictive", gain=1.0)
    tuned = apply_grid_point(base, {"gain": 0.01, "beta": 0.5, "eps": 1e-5, "n_forecasts": 50, "n_offline": 50})
    assert tuned.gain == 0.01
    assert tuned.optimizer.kind == "adam"
    assert tuned.optimizer.beta == 0.5
    assert tuned.n_forecasts == 50
    assert apply_grid_point(base, {}).optimizer.kind == "ogd"


def _factory(spec):
    def make(point):
        return build_controller(apply_grid_point(ControllerConfig(kind="p_control", gain=1.0), point), spec)

    return make


def test_single_point_grid(short_synthetic):
    """A one-point grid is trivially selected."""
    stream, spec = short_synthetic
    result = tune_gain(stream, _factory(spec), [{"gain": 0.1}], spec)
    assert result.best == {"gain": 0.1}
    assert len(result.records) == 1


def test_best_matches_log(short_synthetic):
    """The reported best objective is the maximum of the grid log."""
    stream, spec = short_synthetic
    grid = [{"gain": g} for g in (0.001, 0.1, 10.0)]
    result = tune_gain(stream, _factory(spec), grid, spec)
    frame = result.to_frame()
    assert result.best_objective == pytest.approx(frame["objective"].max())
    assert result.best_objective == pytest.approx(
        run_episode(_factory(spec)(result.best), stream, spec, mode="expected").objective
    )


def test_ties_prefer_later_point(short_synthetic):
    """Equal objectives keep the last grid point."""
    stream, spec = short_synthetic
    spec0 = spec.with_phi(0.0)
    make = lambda point: build_controller(ControllerConfig(kind="unconstrained"), spec0)  # noqa: E731
    result = tune_gain(stream, make, [{"gain": 1.0}, {"gain": 2.0}], spec0)
    assert result.best == {"gain": 2.0}


def test_realized_median(short_synthetic):
    """Realized-mode tuning scores each point by the median of repeats."""
    stream, spec = short_synthetic
    result = tune_gain(stream, _factory(spec), [{"gain": 1.0}], spec, mode="realized", repeats=3, seed=5)
    assert len(result.records) == 1


def test_invalid_arguments(short_synthetic):
    """Empty grids and zero repeats are rejected."""
    stream, spec = short_synthetic
    with pytest.raises(ValidationError):
        tune_gain(stream, _factory(spec), [], spec)
    with pytest.raises(ValidationError):
        tune_gain(stream, _factory(spec), [{"gain": 1.0}], spec, repeats=0)


def test_is_tunable():
    """Only grids without any hyperparameter are skipped."""
    assert is_tunable([{"gain": 0.1}])
    assert is_tunable(default_grid("p_control"))
    assert not is_tunable(default_grid("oracle"))
    assert not is_tunable([])
