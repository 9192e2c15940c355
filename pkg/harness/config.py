"""
harness/config.py

Frozen experiment configuration built from a profile-backed Config, and the
hash that stamps every artifact produced from it.
"""

import hashlib
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Dict, Optional, Tuple

from dynamics.warp import AugmentConfig
from models.arch import ArchConfig, TrainOpts
from utils.config import Config
from utils.dataset_io import canonical_json
from utils.logging_utils import get_module_logger

# Get module logger
log = get_module_logger()

AUGMENTED_SO = "augmented_so"
METHODS = ("model", "critical_points", "lyapunov", "parameters")

# Keys that only affect where and how fast results are produced
_UNHASHED = ("output_dir", "threads")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything an experiment needs; serializable and hashable."""

    profile: str = "desk"
    seed: int = 0
    systems: Tuple[str, ...] = (AUGMENTED_SO, "simple_oscillator")
    methods: Tuple[str, ...] = METHODS
    test_size: int = 200
    n_train: int = 2000
    train_sigma: float = 0.1
    noise_sigma: float = 0.1
    noise_sigmas: Tuple[float, ...] = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0)
    grid_size: int = 64
    arch: ArchConfig = field(default_factory=ArchConfig)
    train: TrainOpts = field(default_factory=TrainOpts)
    augment: AugmentConfig = field(default_factory=AugmentConfig)
    mc_evals: int = 10
    boundary_resolution: int = 21
    repressilator_grid: int = 10
    lyapunov: Dict[str, Any] = field(default_factory=lambda: {
        "dt": 0.1, "horizon": 100.0, "emb_dim": 4, "calibration_size": 200})
    linear: Dict[str, Any] = field(default_factory=lambda: {"lr": 0.01, "epochs": 200})
    repressilator: Dict[str, Any] = field(default_factory=lambda: {
        "n_cells": 100, "noise_sigma": 0.5, "horizon": 50.0, "dt": 0.1, "neighbors": 8, "power": 2.0})
    output_dir: Optional[str] = None
    threads: int = 1

    @property
    def runs(self) -> int:
        return self.train.runs

    @classmethod
    def from_config(cls, config: Config, output_dir: Optional[str] = None) -> "ExperimentConfig":
        """Freeze the effective settings of a Config."""
        size = int(config.get("grid/size", 64))
        model = dict(config.get("model", {}))
        model["input_size"] = size
        arch = ArchConfig.from_dict(model)
        train_settings = config.get("train", {})
        train = TrainOpts(lr=float(train_settings["lr"]), epochs=int(train_settings["epochs"]),
                          batch_size=int(train_settings["batch_size"]), seed=int(config.get("seed", 0)),
                          runs=int(train_settings["runs"]),
                          val_fraction=float(train_settings.get("val_fraction", 0.1)))
        aug = config.get("augment", {})
        augment = AugmentConfig(bound=float(aug["bound"]), bins=int(aug["bins"]), frame=float(aug["frame"]),
                                min_width=float(aug["min_bin_width"]), min_height=float(aug["min_bin_height"]),
                                min_derivative=float(aug["min_derivative"]))
        experiment = config.get("experiment", {})
        return cls(
            profile=config.get("profile", "desk"),
            seed=int(config.get("seed", 0)),
            systems=tuple(experiment["systems"]),
            methods=tuple(experiment.get("methods", METHODS)),
            test_size=int(experiment["test_size"]),
            n_train=int(config.get("data/n_train")),
            train_sigma=float(config.get("data/noise_sigma", 0.1)),
            noise_sigma=float(experiment.get("noise_sigma", config.get("data/noise_sigma", 0.1))),
            noise_sigmas=tuple(float(s) for s in experiment["noise_sigmas"]),
            grid_size=size,
            arch=arch,
            train=train,
            augment=augment,
            mc_evals=int(config.get("inference/mc_evals", 10)),
            boundary_resolution=int(experiment["boundary_resolution"]),
            repressilator_grid=int(experiment["repressilator_grid"]),
            lyapunov=dict(config.get("baselines/lyapunov", {})),
            linear=dict(config.get("baselines/linear", {})),
            repressilator=dict(config.get("repressilator", {})),
            output_dir=str(output_dir) if output_dir is not None else None,
            threads=int(config.get("threads", 1)),
        )

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["arch"] = self.arch.to_dict()
        data["augment"] = self.augment.to_dict()
        for key in ("systems", "methods", "noise_sigmas"):
            data[key] = list(data[key])
        return data

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON of every result-relevant setting."""
        data = self.to_dict()
        for key in _UNHASHED:
            data.pop(key, None)
        return hashlib.sha256(canonical_json(data)).hexdigest()

    def with_changes(self, **changes) -> "ExperimentConfig":
        return replace(self, **changes)


def config_hash(config: ExperimentConfig) -> str:
    return config.config_hash()
