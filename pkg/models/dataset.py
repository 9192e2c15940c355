"""
Labeled sample and dataset data models
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Optional

import numpy as np

from models.system import DynClass


@dataclass
class LabeledSample:
    """
    One raster of a dataset.

    Attributes:
        angles: (H, W) float32 angle raster
        label: attractor class, or None for unlabeled data
        params: generating parameter vector (float64)
        distance: signed parametric distance to the bifurcation boundary
        raw: optional (2, H, W) float32 velocity raster
    """

    angles: np.ndarray
    label: Optional[DynClass]
    params: np.ndarray
    distance: float = 0.0
    raw: Optional[np.ndarray] = None

    def __post_init__(self):
        self.angles = np.asarray(self.angles, dtype=np.float32)
        self.params = np.asarray(self.params, dtype=np.float64).reshape(-1)
        self.distance = float(self.distance)
        if self.raw is not None:
            self.raw = np.asarray(self.raw, dtype=np.float32)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LabeledSample):
            return NotImplemented
        if (self.raw is None) != (other.raw is None):
            return False
        return (self.label == other.label
                and np.array_equal(self.angles, other.angles)
                and np.array_equal(self.params, other.params)
                and self.distance == other.distance
                and (self.raw is None or np.array_equal(self.raw, other.raw)))


@dataclass
class Dataset:
    """Ordered samples plus the manifest that generated them."""

    samples: List[LabeledSample]
    manifest: Dict[str, Any] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self) -> Iterator[LabeledSample]:
        return iter(self.samples)

    def __getitem__(self, index: int) -> LabeledSample:
        return self.samples[index]

    @property
    def shape(self):
        return self.samples[0].angles.shape if self.samples else (0, 0)

    @property
    def has_raw(self) -> bool:
        return bool(self.samples) and all(s.raw is not None for s in self.samples)

    def angles(self) -> np.ndarray:
        """(N, 1, H, W) angle inputs."""
        return np.stack([s.angles for s in self.samples])[:, None]

    def vectors(self) -> np.ndarray:
        """(N, 2, H, W) raw velocity inputs."""
        if not self.has_raw:
            raise ValueError("Dataset was built without the raw-vector section")
        return np.stack([s.raw for s in self.samples])

    def labels(self) -> np.ndarray:
        """Integer labels (0 point, 1 cycle); unlabeled samples give -1."""
        return np.array([-1 if s.label is None else int(s.label) for s in self.samples], dtype=np.int64)

    def params(self) -> List[np.ndarray]:
        return [s.params for s in self.samples]

    def distances(self) -> np.ndarray:
        return np.array([s.distance for s in self.samples], dtype=np.float64)

    def subset(self, indices) -> "Dataset":
        return Dataset([self.samples[i] for i in indices], dict(self.manifest))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return self.manifest == other.manifest and self.samples == other.samples
