"""
Classifier configuration and result data models
"""

from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from models.system import DynClass

INPUT_MODES = ("angles", "vectors")


@dataclass(frozen=True)
class ArchConfig:
    """Architecture of the conv-attention classifier."""

    channels: Tuple[int, ...] = (16, 32, 64, 128)
    attention: bool = True
    input_mode: str = "angles"
    latent_dim: int = 10
    mlp_hidden: int = 64
    dropout: float = 0.9
    kernel_size: int = 3
    leaky_slope: float = 0.01
    attention_reduction: int = 8
    head_init_scale: float = 0.01
    input_size: int = 64

    def __post_init__(self):
        object.__setattr__(self, "channels", tuple(int(c) for c in self.channels))
        if self.input_mode not in INPUT_MODES:
            raise ValueError(f"input_mode must be one of {INPUT_MODES}, got '{self.input_mode}'")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError(f"dropout rate must lie in [0, 1), got {self.dropout}")
        if self.input_size % (2 ** len(self.channels)):
            raise ValueError(f"input size {self.input_size} is not divisible by 2^{len(self.channels)}")

    @property
    def in_channels(self) -> int:
        return 1 if self.input_mode == "angles" else 2

    @property
    def attention_blocks(self) -> Tuple[int, ...]:
        """Indices of the blocks followed by self-attention (the last two)."""
        if not self.attention:
            return ()
        n = len(self.channels)
        return tuple(range(max(0, n - 2), n))

    @property
    def final_size(self) -> int:
        return self.input_size // (2 ** len(self.channels))

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["channels"] = list(self.channels)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ArchConfig":
        known = {k: v for k, v in data.items() if k in cls.__dataclass_fields__}
        return cls(**known)


@dataclass(frozen=True)
class TrainOpts:
    """Optimizer and schedule settings."""

    lr: float = 1e-4
    epochs: int = 20
    batch_size: int = 64
    seed: int = 0
    runs: int = 5
    val_fraction: float = 0.1

    def __post_init__(self):
        if self.lr <= 0 or self.epochs < 1 or self.batch_size < 1 or self.runs < 1:
            raise ValueError(f"Training options must be positive: {self}")


@dataclass(frozen=True)
class ClassProbs:
    """Averaged logits and derived per-class probabilities for one input."""

    point_logit: float
    cycle_logit: float
    point_prob: float
    cycle_prob: float

    @property
    def label(self) -> DynClass:
        return DynClass.CYCLE if self.cycle_logit > self.point_logit else DynClass.POINT

    @classmethod
    def from_logits(cls, logits: Sequence[float]) -> "ClassProbs":
        from scipy.special import expit
        point, cycle = float(logits[0]), float(logits[1])
        return cls(point, cycle, float(expit(point)), float(expit(cycle)))


@dataclass
class TrainReport:
    """Loss curve and accuracies of one training run."""

    seed: int
    loss_curve: List[float] = field(default_factory=list)
    epoch_losses: List[float] = field(default_factory=list)
    train_accuracy: float = float("nan")
    val_accuracy: float = float("nan")
    steps: int = 0

    def smoothed_loss(self, window: int = 10) -> np.ndarray:
        curve = np.asarray(self.loss_curve, dtype=np.float64)
        if len(curve) < window:
            return curve
        kernel = np.ones(window) / window
        return np.convolve(curve, kernel, mode="valid")
