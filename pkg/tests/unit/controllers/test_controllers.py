"""Tests for stateful controllers and the registry."""

import unittest

import numpy as np
import pytest
from pydantic import ValidationError as PydanticValidationError

from macro_ranking.controllers.base import (
    ControllerConfig,
    OracleController,
    PredictiveController,
    StationaryController,
)
from macro_ranking.controllers.factory import ControllerRegistry, build_controller
from macro_ranking.core.exceptions import ConfigurationError, ForecastError, ValidationError
from macro_ranking.core.types import InterventionSpec, PositionWeights, ProgressState


def test_gain_required():
    """Gain-driven kinds refuse a missing gain."""
    with pytest.raises(PydanticValidationError):
        ControllerConfig(kind="stationary")
    assert ControllerConfig(kind="myopic").gain is None


def test_label_defaults_to_kind():
    """Unnamed controllers are labelled by kind."""
    assert ControllerConfig(kind="oracle").label == "oracle"
    assert ControllerConfig(kind="oracle", name="skyline").label == "skyline"


def test_registry_knows_every_kind():
    """All six control laws are registered."""
    assert ControllerRegistry.kinds() == ["myopic", "oracle", "p_control", "predictive", "stationary", "unconstrained"]
    with pytest.raises(ConfigurationError):
        ControllerRegistry.get("pid")


class TestBuildController(unittest.TestCase):
    """Construction from configuration."""

    def setUp(self):
        self.spec = InterventionSpec(
            tau=np.array([3.0]), phi=np.array([10.0]), horizon_T=6, weights=PositionWeights.for_metrics(3)
        )

    def test_predictive_needs_forecasts(self):
        """Building a predictive controller without forecasts fails."""
        config = ControllerConfig(kind="predictive", gain=1.0)
        with self.assertRaises(ConfigurationError):
            build_controller(config, self.spec)

    def test_predictive_keeps_first_forecasts(self):
        """Only ``n_forecasts`` sequences are kept."""
        config = ControllerConfig(kind="predictive", gain=1.0, n_forecasts=2)
        controller = build_controller(config, self.spec, np.zeros((5, 6, 1)))
        self.assertIsInstance(controller, PredictiveController)
        self.assertEqual(controller.multipliers.lam.shape, (2, 1))

    def test_predictive_rejects_short_tables(self):
        """Too few sequences or the wrong horizon are forecast errors."""
        config = ControllerConfig(kind="predictive", gain=1.0, n_forecasts=4)
        with self.assertRaises(ForecastError):
            build_controller(config, self.spec, np.zeros((3, 6, 1)))
        with self.assertRaises(ForecastError):
            build_controller(config, self.spec, np.zeros((4, 5, 1)))

    def test_oracle_requires_reset(self):
        """The oracle cannot act before it has seen the stream."""
        controller = build_controller(ControllerConfig(kind="oracle"), self.spec)
        self.assertIsInstance(controller, OracleController)
        with self.assertRaises(ConfigurationError):
            controller.reset(None)


def test_snapshot_restore(toy_stream, toy_spec):
    """Restoring a snapshot resumes the multipliers exactly."""
    controller = build_controller(ControllerConfig(kind="stationary", gain=0.5), toy_spec)
    assert isinstance(controller, StationaryController)
    controller.reset(toy_stream.contexts)
    state = ProgressState.zeros(1)
    controller.select(toy_stream[0], state, 1)
    snap = controller.snapshot()

    controller.select(toy_stream[1], state, 2)
    after_two = controller.multipliers.lam.copy()

    controller.restore(snap)
    controller.select(toy_stream[1], state, 2)
    np.testing.assert_allclose(controller.multipliers.lam, after_two)

    with pytest.raises(ValidationError):
        controller.restore({"kind": "myopic"})


def test_reset_clears_multipliers(toy_stream, toy_spec):
    """``reset`` starts a new episode from zero multipliers."""
    controller = build_controller(ControllerConfig(kind="stationary", gain=0.5), toy_spec)
    controller.reset()
    controller.select(toy_stream[0], ProgressState.zeros(1), 1)
    assert controller.multipliers.step == 1
    controller.reset()
    assert controller.multipliers.step == 0
    assert not controller.multipliers.lam.any()
