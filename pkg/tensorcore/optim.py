"""
Adam optimizer over named tensors
"""

from dataclasses import dataclass, field
from typing import Dict, Iterable

import numpy as np

from tensorcore.tensor import Tensor


@dataclass
class AdamState:
    """First and second moment estimates for one parameter."""

    m: np.ndarray
    v: np.ndarray

    @classmethod
    def like(cls, param: np.ndarray) -> "AdamState":
        return cls(np.zeros_like(param, dtype=np.float64), np.zeros_like(param, dtype=np.float64))


def adam_step(param: np.ndarray, grad: np.ndarray, state: AdamState, t: int, lr: float = 1e-4,
              beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8) -> np.ndarray:
    """
    One bias-corrected Adam update.

    Args:
        param: Current parameter values
        grad: Gradient of the loss
        state: Moment estimates, updated in place
        t: 1-based step count

    Returns:
        The updated parameter array (same dtype as `param`)
    """
    if t < 1:
        raise ValueError(f"Adam step count starts at 1, got {t}")
    if grad.shape != param.shape:
        raise ValueError(f"Gradient shape {grad.shape} does not match parameter {param.shape}")
    g = grad.astype(np.float64)
    state.m = beta1 * state.m + (1.0 - beta1) * g
    state.v = beta2 * state.v + (1.0 - beta2) * g * g
    m_hat = state.m / (1.0 - beta1 ** t)
    v_hat = state.v / (1.0 - beta2 ** t)
    update = lr * m_hat / (np.sqrt(v_hat) + eps)
    return (param - update).astype(param.dtype, copy=False)


@dataclass
class Adam:
    """Adam over a set of named tensors; moments are keyed by tensor name."""

    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    states: Dict[str, AdamState] = field(default_factory=dict)

    def step(self, params: Iterable[Tensor]) -> None:
        self.t += 1
        for param in params:
            if not param.trainable or param.grad is None:
                continue
            state = self.states.setdefault(param.name, AdamState.like(param.data))
            param.data = adam_step(param.data, param.grad, state, self.t, self.lr,
                                   self.beta1, self.beta2, self.eps)
