"""Lagrange multiplier state and the online update rules that drive it.

Updates are written as descent on ``grad``; the controllers pass the negated
ascent direction, so a shortfall in progress raises the multiplier.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Literal

import numpy as np
from numpy.typing import ArrayLike
from pydantic import BaseModel, Field

from macro_ranking.core.exceptions import ValidationError
from macro_ranking.core.types import FloatArray


class OptimizerConfig(BaseModel):
    """Which update rule moves the multipliers, and its constants."""

    kind: Literal["ogd", "adam"] = Field(default="ogd")
    beta: float = Field(default=0.9, gt=0.0, lt=1.0, description="Shared decay of both Adam moments.")
    eps: float = Field(default=1e-8, gt=0.0, description="Adam denominator offset.")


@dataclass(frozen=True, eq=False)
class MultiplierState:
    """Unclipped multipliers plus Adam moments; ``step`` counts applied updates."""

    lam: FloatArray
    m: FloatArray
    v: FloatArray
    step: int = 0

    def __post_init__(self) -> None:
        arrays = {}
        for name in ("lam", "m", "v"):
            array = np.array(getattr(self, name), dtype=np.float64)
            if not np.all(np.isfinite(array)):
                raise ValidationError(f"multiplier field {name} is not finite")
            array.setflags(write=False)
            arrays[name] = array
        if not (arrays["lam"].shape == arrays["m"].shape == arrays["v"].shape):
            raise ValidationError("multiplier and moment shapes differ")
        for name, array in arrays.items():
            object.__setattr__(self, name, array)

    @classmethod
    def zeros(cls, shape: int | tuple[int, ...]) -> MultiplierState:
        return cls(lam=np.zeros(shape), m=np.zeros(shape), v=np.zeros(shape))

    def clipped(self, phi: ArrayLike) -> FloatArray:
        """Multipliers as used inside an argmax, clipped to ``[0, phi]``."""
        return np.clip(self.lam, 0.0, np.asarray(phi, dtype=np.float64))

    def to_dict(self) -> dict[str, Any]:
        return {"lam": self.lam.tolist(), "m": self.m.tolist(), "v": self.v.tolist(), "step": self.step}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> MultiplierState:
        try:
            return cls(
                lam=np.asarray(data["lam"]), m=np.asarray(data["m"]), v=np.asarray(data["v"]), step=int(data["step"])
            )
        except KeyError as e:
            raise ValidationError(f"multiplier snapshot is missing {e.args[0]!r}", cause=e) from e


def _check_grad(st: MultiplierState, grad: ArrayLike) -> FloatArray:
    g = np.asarray(grad, dtype=np.float64)
    if g.shape != st.lam.shape:
        raise ValidationError(f"gradient shape {g.shape} does not match multipliers {st.lam.shape}")
    return g


def ogd_update(st: MultiplierState, grad: ArrayLike, gamma: float) -> MultiplierState:
    """Online gradient descent: ``lam - gamma * grad``."""
    g = _check_grad(st, grad)
    return MultiplierState(lam=st.lam - gamma * g, m=st.m, v=st.v, step=st.step + 1)


def adam_update(st: MultiplierState, grad: ArrayLike, gamma: float, beta: float, eps: float) -> MultiplierState:
    """Adam with one decay ``beta`` for both moments and bias correction.

    Args:
        st: Current state
        grad: Descent direction, same shape as the multipliers
        gamma: Step size
        beta: Moment decay in (0, 1)
        eps: Offset inside the square root

    Returns:
        The updated state
    """
    if not 0.0 < beta < 1.0:
        raise ValidationError(f"beta must lie in (0, 1), got {beta}")
    if eps <= 0:
        raise ValidationError(f"eps must be positive, got {eps}")
    g = _check_grad(st, grad)
    step = st.step + 1
    m = beta * st.m + (1.0 - beta) * g
    v = beta * st.v + (1.0 - beta) * g * g
    m_hat = m / (1.0 - beta**step)
    v_hat = v / (1.0 - beta**step)
    return MultiplierState(lam=st.lam - gamma * m_hat / np.sqrt(v_hat + eps), m=m, v=v, step=step)


def apply_update(st: MultiplierState, grad: ArrayLike, gamma: float, optimizer: OptimizerConfig) -> MultiplierState:
    if optimizer.kind == "adam":
        return adam_update(st, grad, gamma, optimizer.beta, optimizer.eps)
    return ogd_update(st, grad, gamma)
