"""
Raster and sample-cloud data models: lattices, vector fields, angle fields,
trajectories and scattered velocity samples.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np

from models.system import Interval
from utils.errors import NonFiniteField


@dataclass(frozen=True)
class GridSpec:
    """Endpoint-inclusive uniform lattice over a rectangular extent."""

    width: int = 64
    height: int = 64
    extent: Tuple[Interval, Interval] = ((-1.0, 1.0), (-1.0, 1.0))

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.height, self.width)

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(self.extent[0][0], self.extent[0][1], self.width)

    @property
    def ys(self) -> np.ndarray:
        return np.linspace(self.extent[1][0], self.extent[1][1], self.height)

    @property
    def spacing(self) -> Tuple[float, float]:
        (x0, x1), (y0, y1) = self.extent
        return ((x1 - x0) / (self.width - 1), (y1 - y0) / (self.height - 1))

    def lattice(self) -> np.ndarray:
        """Lattice points as an (H, W, 2) array; row index follows y, column follows x."""
        xx, yy = np.meshgrid(self.xs, self.ys)
        return np.stack([xx, yy], axis=-1)

    def nearest_index(self, point) -> Tuple[int, int]:
        """(row, col) of the lattice point nearest to `point`."""
        col = int(np.argmin(np.abs(self.xs - point[0])))
        row = int(np.argmin(np.abs(self.ys - point[1])))
        return row, col


@dataclass
class VectorField:
    """Velocity raster: u, v are (H, W) arrays over `grid`."""

    u: np.ndarray
    v: np.ndarray
    grid: GridSpec
    provenance: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=np.float64)
        self.v = np.asarray(self.v, dtype=np.float64)
        if self.u.shape != self.grid.shape or self.v.shape != self.grid.shape:
            raise ValueError(f"Field shape {self.u.shape}/{self.v.shape} does not match grid {self.grid.shape}")
        bad = ~(np.isfinite(self.u) & np.isfinite(self.v))
        if bad.any():
            row, col = np.argwhere(bad)[0]
            raise NonFiniteField(f"Field has {int(bad.sum())} non-finite cells, first at row {row}, column {col}")

    @property
    def magnitude(self) -> np.ndarray:
        return np.hypot(self.u, self.v)

    def rms(self) -> float:
        """Root-mean-square vector magnitude."""
        return float(np.sqrt(np.mean(self.u ** 2 + self.v ** 2)))

    def stacked(self) -> np.ndarray:
        """(2, H, W) array of the two components."""
        return np.stack([self.u, self.v])

    def scaled(self, factor: float) -> "VectorField":
        return VectorField(self.u * factor, self.v * factor, self.grid, dict(self.provenance))


@dataclass
class AngleField:
    """Quadrant-correct angle raster with entries in (-pi, pi]."""

    phi: np.ndarray
    grid: GridSpec
    provenance: Dict[str, Any] = field(default_factory=dict)


@dataclass
class Trajectory:
    """Uniform-step trajectory; states is a (T, dim) array."""

    times: np.ndarray
    states: np.ndarray

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else 0.0

    def __len__(self) -> int:
        return len(self.times)


@dataclass
class ScatteredVelocities:
    """Unstructured 2-D velocity samples: points and velocities are (N, 2)."""

    points: np.ndarray
    velocities: np.ndarray
    provenance: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64).reshape(-1, 2)
        self.velocities = np.asarray(self.velocities, dtype=np.float64).reshape(-1, 2)
        if len(self.points) != len(self.velocities):
            raise ValueError(f"{len(self.points)} points but {len(self.velocities)} velocities")

    def __len__(self) -> int:
        return len(self.points)

    def bounding_grid(self, size: int = 64, margin: float = 0.05) -> GridSpec:
        """Square lattice over the sample bounding box, padded by `margin` of its span."""
        lo = self.points.min(axis=0)
        hi = self.points.max(axis=0)
        span = np.maximum(hi - lo, 1e-9)
        lo = lo - margin * span
        hi = hi + margin * span
        return GridSpec(size, size, ((float(lo[0]), float(hi[0])), (float(lo[1]), float(hi[1]))))
