"""
AdamW with decoupled weight decay over named parameter arrays.

Parameters are updated in place. Complex tensors are optimized as independent
real/imaginary pairs through their float64 views.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Collection, Dict, Mapping, Optional

import numpy as np

from .constants import (
    DEFAULT_ADAM_EPS,
    DEFAULT_BETA1,
    DEFAULT_BETA2,
    DEFAULT_LR,
    DEFAULT_WEIGHT_DECAY,
    LrSchedule,
)
from .errors import ConfigError, OptimizerError, ShapeError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OptimConfig:
    """
    AdamW hyperparameters.

    Args:
        lr: Learning rate (initial value under a schedule).
        beta1: First-moment decay.
        beta2: Second-moment decay.
        eps: Denominator offset.
        weight_decay: Decoupled decay coefficient.
        schedule: CONSTANT or COSINE decay over the whole run.
        min_lr: Floor reached by the cosine schedule.
    """

    lr: float = DEFAULT_LR
    beta1: float = DEFAULT_BETA1
    beta2: float = DEFAULT_BETA2
    eps: float = DEFAULT_ADAM_EPS
    weight_decay: float = DEFAULT_WEIGHT_DECAY
    schedule: LrSchedule = LrSchedule.CONSTANT
    min_lr: float = 0.0

    def __post_init__(self) -> None:
        if not self.lr > 0:
            raise ConfigError(f"lr must be positive, got {self.lr}.")
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
            raise ConfigError(f"betas must lie in [0, 1), got ({self.beta1}, {self.beta2}).")
        if not self.eps > 0:
            raise ConfigError(f"eps must be positive, got {self.eps}.")
        if self.weight_decay < 0:
            raise ConfigError(f"weight_decay must be non-negative, got {self.weight_decay}.")
        if not 0.0 <= self.min_lr <= self.lr:
            raise ConfigError(f"min_lr must lie in [0, lr], got {self.min_lr}.")


def _real(array: np.ndarray) -> np.ndarray:
    return array.view(np.float64) if np.iscomplexobj(array) else array


@dataclass(eq=False)
class AdamWState:
    """
    Step counter and moment accumulators.

    m and v hold float64 arrays shaped like each parameter's real view
    (a complex tensor's last axis doubles to interleaved re/im).
    """

    step: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def zeros_like(cls, params: Mapping[str, np.ndarray]) -> "AdamWState":
        return cls(
            step=0,
            m={name: np.zeros_like(_real(p), dtype=np.float64) for name, p in params.items()},
            v={name: np.zeros_like(_real(p), dtype=np.float64) for name, p in params.items()},
        )


def lr_at(config: OptimConfig, step: int, total_steps: Optional[int] = None) -> float:
    """
    Learning rate for the update that follows `step` completed updates.
    """

    if config.schedule == LrSchedule.CONSTANT or not total_steps:
        return config.lr
    progress = min(step, total_steps) / total_steps
    return config.min_lr + 0.5 * (config.lr - config.min_lr) * (1.0 + math.cos(math.pi * progress))


def step(
    params: Mapping[str, np.ndarray],
    grads: Mapping[str, np.ndarray],
    state: AdamWState,
    config: OptimConfig,
    no_decay: Collection[str] = (),
    lr: Optional[float] = None,
) -> AdamWState:
    """
    One AdamW update, in place.

    Args:
        params: Named parameter arrays (mutated).
        grads: Gradients with the same names and shapes.
        state: Moment state (mutated).
        config: Hyperparameters.
        no_decay: Names that skip weight decay.
        lr: Override for the learning rate (used by schedules).

    Returns:
        The updated state.

    Raises:
        OptimizerError: When a gradient is non-finite; nothing is modified.
        ShapeError: When a gradient or moment does not match its parameter.
    """

    for name, param in params.items():
        grad = grads[name]
        if grad.shape != param.shape:
            raise ShapeError(f"Gradient for '{name}' has shape {grad.shape}, expected {param.shape}.")
        if not np.all(np.isfinite(grad)):
            raise OptimizerError(f"Non-finite gradient in tensor '{name}'.", tensor=name)
        if name not in state.m:
            state.m[name] = np.zeros_like(_real(param), dtype=np.float64)
            state.v[name] = np.zeros_like(_real(param), dtype=np.float64)
        elif state.m[name].shape != _real(param).shape:
            raise ShapeError(f"Optimizer state for '{name}' does not match the parameter shape.")

    state.step += 1
    rate = config.lr if lr is None else lr
    bias1 = 1.0 - config.beta1**state.step
    bias2 = 1.0 - config.beta2**state.step
    for name, param in params.items():
        theta = _real(param)
        g = _real(np.ascontiguousarray(grads[name]))
        m, v = state.m[name], state.v[name]
        m *= config.beta1
        m += (1.0 - config.beta1) * g
        v *= config.beta2
        v += (1.0 - config.beta2) * g * g
        update = (m / bias1) / (np.sqrt(v / bias2) + config.eps)
        if config.weight_decay and name not in no_decay:
            update = update + config.weight_decay * theta
        theta -= rate * update
    return state
