"""Closed-loop ranking controllers and multiplier updates."""

from macro_ranking.controllers.base import (
    Controller,
    ControllerConfig,
    MyopicController,
    OracleController,
    PControlController,
    PredictiveController,
    StationaryController,
    UnconstrainedController,
)
from macro_ranking.controllers.factory import ControllerRegistry, build_controller
from macro_ranking.controllers.multipliers import (
    MultiplierState,
    OptimizerConfig,
    adam_update,
    apply_update,
    ogd_update,
)
from macro_ranking.controllers.policies import (
    boosted_ranking,
    myopic_select,
    oracle_plan,
    p_control_select,
    predictive_select,
    stationary_select,
    unconstrained_select,
)

__all__ = [
    "Controller",
    "ControllerConfig",
    "ControllerRegistry",
    "MultiplierState",
    "MyopicController",
    "OptimizerConfig",
    "OracleController",
    "PControlController",
    "PredictiveController",
    "StationaryController",
    "UnconstrainedController",
    "adam_update",
    "apply_update",
    "boosted_ranking",
    "build_controller",
    "myopic_select",
    "ogd_update",
    "oracle_plan",
    "p_control_select",
    "predictive_select",
    "stationary_select",
    "unconstrained_select",
]
