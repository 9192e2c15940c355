"""
Named parameter tensors and spectral-normalization state
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from utils.errors import NonFiniteState

_DEBUG = {"finite_checks": False}


def set_debug(enabled: bool) -> None:
    """Turn the per-op finiteness check on or off."""
    _DEBUG["finite_checks"] = bool(enabled)


def debug_enabled() -> bool:
    return _DEBUG["finite_checks"]


def check_finite(array: np.ndarray, where: str) -> np.ndarray:
    if _DEBUG["finite_checks"] and not np.all(np.isfinite(array)):
        raise NonFiniteState(f"Non-finite values produced by {where}")
    return array


@dataclass
class Tensor:
    """A named, row-major parameter array with an optional gradient buffer."""

    name: str
    data: np.ndarray
    grad: Optional[np.ndarray] = None
    trainable: bool = True

    @property
    def shape(self):
        return self.data.shape

    @property
    def size(self) -> int:
        return int(self.data.size)

    def zero_grad(self) -> None:
        self.grad = np.zeros_like(self.data)

    def accumulate(self, grad: np.ndarray) -> None:
        if grad.shape != self.data.shape:
            raise ValueError(f"Gradient shape {grad.shape} does not match {self.name} {self.data.shape}")
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += grad.astype(self.data.dtype, copy=False)


def _unit(vector: np.ndarray, eps: float = 1e-12) -> np.ndarray:
    return vector / (np.linalg.norm(vector) + eps)


@dataclass
class SpectralState:
    """
    Power-iteration estimates of the top singular vectors of one weight.

    Attributes:
        u: left singular-vector estimate, unit norm, length C_out
        v: right singular-vector estimate, unit norm, length of the flattened fan-in
        iterations: number of power iterations performed so far
    """

    u: np.ndarray
    v: np.ndarray
    iterations: int = 0
    sigma: float = field(default=float("nan"))

    @classmethod
    def create(cls, weight: np.ndarray, rng: np.random.Generator) -> "SpectralState":
        rows = weight.shape[0]
        cols = int(np.prod(weight.shape[1:]))
        return cls(_unit(rng.standard_normal(rows)), _unit(rng.standard_normal(cols)))

    def iterate(self, matrix: np.ndarray, n_iter: int = 1) -> float:
        """Run power iterations in float64 and return the singular-value estimate."""
        matrix = np.asarray(matrix, dtype=np.float64)
        u = self.u.astype(np.float64)
        v = self.v.astype(np.float64)
        for _ in range(n_iter):
            v = _unit(matrix.T @ u)
            u = _unit(matrix @ v)
        self.u, self.v = u, v
        self.iterations += n_iter
        self.sigma = float(u @ matrix @ v)
        return self.sigma
