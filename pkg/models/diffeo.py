"""
Per-dimension bounded monotone rational-quadratic spline data model
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Diffeo:
    """
    Knot parameters of a per-axis rational-quadratic spline on [-bound, bound].

    Attributes:
        widths: (dims, K) positive bin widths summing to 2*bound per row
        heights: (dims, K) positive bin heights summing to 2*bound per row
        derivatives: (dims, K+1) positive knot derivatives, 1 at both ends
        bound: half-width B of the active interval
        id: identifier derived from the sampling seed
    """

    widths: np.ndarray
    heights: np.ndarray
    derivatives: np.ndarray
    bound: float
    id: str = "identity"

    @property
    def dims(self) -> int:
        return self.widths.shape[0]

    @property
    def bins(self) -> int:
        return self.widths.shape[1]

    @property
    def knots_x(self) -> np.ndarray:
        return _knots(self.widths, self.bound)

    @property
    def knots_y(self) -> np.ndarray:
        return _knots(self.heights, self.bound)

    @property
    def is_identity(self) -> bool:
        """Equal widths and heights with unit derivatives give the identity map."""
        return bool(np.array_equal(self.widths, self.heights) and np.all(self.derivatives == 1.0))

    @classmethod
    def identity(cls, bound: float = 4.0, bins: int = 5, dims: int = 2) -> "Diffeo":
        widths = np.full((dims, bins), 2.0 * bound / bins)
        return cls(widths, widths.copy(), np.ones((dims, bins + 1)), float(bound), "identity")

    def to_dict(self) -> dict:
        return {"id": self.id, "bound": self.bound, "widths": self.widths.tolist(),
                "heights": self.heights.tolist(), "derivatives": self.derivatives.tolist()}


def _knots(sizes: np.ndarray, bound: float) -> np.ndarray:
    knots = np.concatenate([np.zeros((sizes.shape[0], 1)), np.cumsum(sizes, axis=1)], axis=1) - bound
    knots[:, 0] = -bound
    knots[:, -1] = bound
    return knots
