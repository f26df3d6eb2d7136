"""Registry of controller kinds and construction from configuration."""

from __future__ import annotations

from numpy.typing import ArrayLike

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
from macro_ranking.core.exceptions import ConfigurationError
from macro_ranking.core.types import InterventionSpec


class ControllerRegistry:
    """Maps controller kinds to their classes."""

    _controllers: dict[str, type[Controller]] = {}

    @classmethod
    def register(cls, controller_class: type[Controller]) -> type[Controller]:
        cls._controllers[controller_class.kind] = controller_class
        return controller_class

    @classmethod
    def get(cls, kind: str) -> type[Controller]:
        if kind not in cls._controllers:
            raise ConfigurationError(f"unknown controller kind {kind!r}; known: {sorted(cls._controllers)}")
        return cls._controllers[kind]

    @classmethod
    def kinds(cls) -> list[str]:
        return sorted(cls._controllers)


for _cls in (
    UnconstrainedController,
    MyopicController,
    StationaryController,
    PControlController,
    PredictiveController,
    OracleController,
):
    ControllerRegistry.register(_cls)


def build_controller(
    config: ControllerConfig,
    spec: InterventionSpec,
    forecasts: ArrayLike | None = None,
) -> Controller:
    """Instantiate the controller described by ``config``.

    Args:
        config: Controller settings
        spec: Intervention the controller works towards
        forecasts: Progress-to-go values of shape ``(B, T, m)``, required by
            the predictive controller and ignored by the others

    Returns:
        A controller ready for ``reset``
    """
    controller_class = ControllerRegistry.get(config.kind)
    if controller_class is PredictiveController:
        if forecasts is None:
            raise ConfigurationError("the predictive controller requires progress-to-go forecasts")
        return PredictiveController(config, spec, forecasts)
    return controller_class(config, spec)
