"""Tests for baseline targets and violation-cost sweeps."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from macro_ranking.controllers.base import ControllerConfig
from macro_ranking.core.exceptions import ConfigurationError, ValidationError
from macro_ranking.forecast.source import ForecastSource
from macro_ranking.simhub.sweep import TuningSetup, run_controller, sweep_phi, target_from_baseline

CONTROLLERS = [
    ControllerConfig(kind="unconstrained", progress_mode="expected"),
    ControllerConfig(kind="myopic", progress_mode="expected"),
    ControllerConfig(kind="oracle", progress_mode="expected"),
]


def test_baseline_targets_scale(toy_stream, toy_spec):
    """Targets are factors of the relevance ranking's cumulative progress."""
    # Item c sits last with exposure 1/3 at each of six steps.
    assert_allclose(target_from_baseline(toy_stream, toy_spec, 1.5), [3.0])
    assert_allclose(target_from_baseline(toy_stream, toy_spec, [0.0]), [0.0])
    with pytest.raises(ValidationError):
        target_from_baseline(toy_stream, toy_spec, -1.0)


def test_baseline_is_zero_on_synthetic(short_synthetic):
    """Baseline-relative targets vanish on the synthetic stream."""
    stream, spec = short_synthetic
    assert_allclose(target_from_baseline(stream, spec, 2.0), [0.0, 0.0])


def test_sweep_layout(short_synthetic):
    """One row per (controller, phi), in the order given."""
    stream, spec = short_synthetic
    frame = sweep_phi(stream, spec, CONTROLLERS, [0.01, 1.0, 100.0], workers=1)
    assert list(frame.columns[:6]) == ["controller", "phi", "objective", "utility", "violation", "shortfall"]
    assert list(frame["controller"]) == ["unconstrained"] * 3 + ["myopic"] * 3 + ["oracle"] * 3
    assert list(frame["phi"]) == [0.01, 1.0, 100.0] * 3


def test_oracle_shortfall_falls_with_phi(short_synthetic):
    """Raising phi never increases the oracle's unmet target."""
    stream, spec = short_synthetic
    frame = sweep_phi(stream, spec, CONTROLLERS[2:], [0.01, 1.0, 100.0], workers=1)
    assert np.all(np.diff(frame["shortfall"].to_numpy()) <= 1e-7)
    assert frame["shortfall"].iloc[-1] == pytest.approx(0.0, abs=1e-6)


def test_small_phi_controllers_agree(short_synthetic):
    """At a tiny cost every controller is close to the unconstrained one."""
    stream, spec = short_synthetic
    frame = sweep_phi(stream, spec, CONTROLLERS, [0.01], workers=1)
    base = frame.loc[frame["controller"] == "unconstrained", "objective"].iloc[0]
    assert np.all(np.abs(frame["objective"] - base) <= 0.05 * abs(base))


def test_parallel_matches_serial(short_synthetic):
    """Worker processes do not change the results."""
    stream, spec = short_synthetic
    serial = sweep_phi(stream, spec, CONTROLLERS[:2], [1.0, 100.0], workers=1)
    parallel = sweep_phi(stream, spec, CONTROLLERS[:2], [1.0, 100.0], workers=2)
    assert_allclose(serial["objective"], parallel["objective"])


def test_predictive_needs_source(short_synthetic):
    """Without a forecast source the predictive controller cannot run."""
    stream, spec = short_synthetic
    with pytest.raises(ConfigurationError):
        run_controller(ControllerConfig(kind="predictive", gain=1.0), stream, spec)


def test_predictive_with_exact_forecasts(short_synthetic):
    """Exact forecasts drive the predictive controller between the baseline and the oracle."""
    stream, spec = short_synthetic
    source = ForecastSource(method="oracle")
    config = ControllerConfig(kind="predictive", gain=1.0, n_forecasts=2, progress_mode="expected")
    result = run_controller(config, stream, spec, mode="expected", forecast_source=source, n_offline=2)
    assert result.controller == "predictive"
    baseline = run_controller(ControllerConfig(kind="unconstrained"), stream, spec)
    oracle = run_controller(ControllerConfig(kind="oracle"), stream, spec)
    assert result.shortfall().sum() < baseline.shortfall().sum()
    assert baseline.objective < result.objective <= oracle.objective + 1e-6 * max(1.0, abs(oracle.objective))


def test_tuned_sweep_records_parameters(short_synthetic):
    """Tuned cells carry the chosen parameters."""
    stream, spec = short_synthetic
    tuning = TuningSetup(
        dev_stream=stream,
        dev_spec=spec,
        grids={"stationary": [{"gain": 0.1}, {"gain": 1.0}]},
    )
    config = ControllerConfig(kind="stationary", gain=1.0, progress_mode="expected")
    frame = sweep_phi(stream, spec, [config], [100.0], workers=1, tuning=tuning)
    assert frame["param_gain"].iloc[0] in (0.1, 1.0)


def test_empty_grid_rejected(short_synthetic):
    """The phi grid must not be empty."""
    stream, spec = short_synthetic
    with pytest.raises(ValidationError):
        sweep_phi(stream, spec, CONTROLLERS, [], workers=1)


def test_single_point_grid_is_applied(short_synthetic):
    """A one-point grid replaces the configured gain in every cell."""
    stream, spec = short_synthetic
    tuning = TuningSetup(dev_stream=stream, dev_spec=spec, grids={"stationary": [{"gain": 0.1}]})
    config = ControllerConfig(kind="stationary", gain=1.0, progress_mode="expected")
    frame = sweep_phi(stream, spec, [config], [1.0, 100.0], workers=1, tuning=tuning)
    assert list(frame["param_gain"]) == [0.1, 0.1]
    expected = run_controller(config.model_copy(update={"gain": 0.1}), stream, spec.with_phi(100.0))
    assert frame["objective"].iloc[1] == pytest.approx(expected.objective)


def test_oracle_ignores_context_order(short_synthetic):
    """Terminal targets make the oracle value depend only on which contexts arrive."""
    stream, spec = short_synthetic
    oracle = ControllerConfig(kind="oracle", progress_mode="expected")
    temporal = run_controller(oracle, stream, spec).objective
    shuffled = run_controller(oracle, stream.shuffled(seed=1), spec).objective
    assert shuffled == pytest.approx(temporal, rel=1e-6)
