"""
harness/experiments.py

Experiment orchestration: accuracy tables, noise sweeps, boundary maps,
confidence-vs-distance correlations, the repressilator study, ablations and
the bound/data-size/architecture sweeps.

Every experiment is a pure function of its ExperimentConfig. Trained models
are cached as checkpoints and finished result cells as JSON under the
output directory, so re-running a configuration resumes where it stopped.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.special import expit
from scipy.stats import pearsonr, spearmanr
from sklearn.isotonic import IsotonicRegression
from sklearn.metrics import accuracy_score

from baselines.critical_points import classify_critical
from baselines.lyapunov import lyapunov_scores, scores_to_labels
from baselines.polyfit import LinearClassifier, linear_fit, linear_predict, parameters_features
from baselines.roc import ThresholdFit, fit_threshold_roc
from classifier import checkpoint
from classifier.inference import field_input, mc_logits, predict_dataset, predicted_labels
from classifier.network import Model, build_model
from classifier.training import train
from dynamics.odeint import scattered_to_field, simulate_repressilator_sample
from dynamics.rasterize import (default_grid, derive_rng, field_from_raw, grid_from_manifest,
                                make_zoo_dataset, rasterize, renoise_dataset)
from dynamics.systemzoo import (boundary_curve, make_system, param_names, param_ranges,
                                repressilator_curve, repressilator_label, resolve_name,
                                sample_params, subhopf_regime, true_label)
from dynamics.warp import (AugmentConfig, fixed_point_in_frame, fixed_point_location,
                          make_augmented_dataset, make_augmented_split, sample_diffeo)
from harness.config import AUGMENTED_SO, ExperimentConfig
from harness.result_store import NullStore, ResultStore, cell_key
from models.arch import ArchConfig
from models.dataset import Dataset
from models.field import VectorField
from models.system import DynClass, SystemName
from utils.errors import ConfigError
from utils.logging_utils import get_module_logger

# Get module logger
log = get_module_logger()

# Seed streams, mixed with the config seed
RUN_STREAM = 101
NOISE_STREAM = 102
MC_STREAM = 103
LYAPUNOV_STREAM = 104
CELL_STREAM = 105
PROBE_STREAM = 106

REPRESSILATOR_ALPHA_MAX = 30.0
REPRESSILATOR_BETA_MAX = 10.0
SUBHOPF_MUS = (-0.4, -0.1, 0.3)
PROBE_SIZE = 50
DISTANCE_BINS = 10

ABLATIONS = {
    "full": dict(),
    "no_attention": dict(attention=False),
    "from_vectors": dict(input_mode="vectors"),
    "no_augmentation": dict(),
    "cnn_baseline": dict(attention=False, input_mode="vectors"),
}
UNAUGMENTED_VARIANTS = ("no_augmentation", "cnn_baseline")

DEFAULT_BOUNDS = (1.0, 2.0, 3.0, 4.0, 5.0)
DEFAULT_SIZES = (250, 500, 1000, 2000)


def derived_seed(*keys: int) -> int:
    """Integer seed drawn from a generator keyed by `keys`."""
    return int(derive_rng(*keys).integers(2 ** 31))


def _sigma_key(sigma: float) -> int:
    return int(round(sigma * 1000))


@dataclass
class BoundaryMap:
    """Mean cycle prediction over a two-parameter grid."""

    system: str
    axis_names: Tuple[str, str]
    xs: np.ndarray
    ys: np.ndarray
    values: np.ndarray
    runs: int
    overlay: List[np.ndarray] = field(default_factory=list)
    truth: Optional[np.ndarray] = None

    def accuracy(self) -> float:
        """Share of cells whose majority decision matches the ground truth."""
        if self.truth is None:
            return float("nan")
        return float(np.mean((self.values > 0.5) == (self.truth == int(DynClass.CYCLE))))

    def flip_positions(self) -> List[Optional[float]]:
        """Per row, the x where the mean prediction first crosses 0.5 (None when it never does)."""
        flips: List[Optional[float]] = []
        for row in self.values:
            side = row > 0.5
            crossings = np.flatnonzero(side[1:] != side[:-1])
            if not len(crossings):
                flips.append(None)
                continue
            i = int(crossings[0])
            y0, y1 = row[i] - 0.5, row[i + 1] - 0.5
            t = y0 / (y0 - y1) if y0 != y1 else 0.5
            flips.append(float(self.xs[i] + t * (self.xs[i + 1] - self.xs[i])))
        return flips

    def to_dict(self) -> Dict[str, Any]:
        return {
            "system": self.system,
            "axis_names": list(self.axis_names),
            "xs": self.xs.tolist(),
            "ys": self.ys.tolist(),
            "values": self.values.tolist(),
            "runs": self.runs,
            "overlay": [line.tolist() for line in self.overlay],
            "truth": None if self.truth is None else self.truth.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "BoundaryMap":
        truth = data.get("truth")
        return cls(data["system"], tuple(data["axis_names"]), np.asarray(data["xs"], dtype=np.float64),
                   np.asarray(data["ys"], dtype=np.float64), np.asarray(data["values"], dtype=np.float64),
                   int(data["runs"]), [np.asarray(line, dtype=np.float64) for line in data.get("overlay", [])],
                   None if truth is None else np.asarray(truth, dtype=np.int64))

    def to_frame(self) -> pd.DataFrame:
        xx, yy = np.meshgrid(self.xs, self.ys)
        frame = pd.DataFrame({self.axis_names[0]: xx.ravel(), self.axis_names[1]: yy.ravel(),
                              "mean_cycle_prediction": self.values.ravel()})
        if self.truth is not None:
            frame["true_label"] = self.truth.ravel()
        frame.insert(0, "system", self.system)
        return frame


@dataclass
class CorrelationReport:
    """Rank correlation between cycle probability and signed boundary distance."""

    system: str
    rho: Optional[float]
    status: str
    pearson: Optional[float] = None
    samples: int = 0
    curves: Optional[pd.DataFrame] = None

    @property
    def applicable(self) -> bool:
        return self.status == "ok"


def correlation_report(probabilities, distances, labels, system: str = "") -> CorrelationReport:
    """
    Spearman rho of cycle probability against signed distance, plus binned curves.

    Constant inputs have no rank correlation; the report is then marked
    'not_applicable' with rho None.
    """
    probabilities = np.asarray(probabilities, dtype=np.float64)
    distances = np.asarray(distances, dtype=np.float64)
    labels = np.asarray(labels)
    curves = binned_curves(probabilities, distances, labels)
    if np.ptp(probabilities) == 0 or np.ptp(distances) == 0:
        log.warning(f"{system}: constant predictions or distances, correlation not applicable")
        return CorrelationReport(system, None, "not_applicable", None, len(probabilities), curves)
    rho = float(spearmanr(probabilities, distances).correlation)
    r = float(pearsonr(probabilities, distances)[0])
    log.info(f"{system}: Spearman rho {rho:.3f} (Pearson {r:.3f}) over {len(probabilities)} samples")
    return CorrelationReport(system, rho, "ok", r, len(probabilities), curves)


def binned_curves(probabilities: np.ndarray, distances: np.ndarray, labels: np.ndarray,
                  bins: int = DISTANCE_BINS) -> pd.DataFrame:
    """Mean and std of the cycle probability per |distance| bin and true class."""
    frame = pd.DataFrame({"distance": np.abs(distances), "probability": probabilities, "label": labels})
    if frame.empty or frame["distance"].max() == 0:
        frame["bin"] = 0
    else:
        edges = np.linspace(0.0, frame["distance"].max(), bins + 1)
        frame["bin"] = np.clip(np.searchsorted(edges, frame["distance"], side="right") - 1, 0, bins - 1)
    grouped = frame.groupby(["label", "bin"])
    curves = grouped.agg(distance=("distance", "mean"), mean=("probability", "mean"),
                         std=("probability", "std"), count=("probability", "size")).reset_index()
    curves["label"] = curves["label"].map(lambda v: DynClass(int(v)).short)
    return curves


class ExperimentRunner:
    """Shared datasets, trained ensembles and fitted baselines of one configuration."""

    def __init__(self, config: ExperimentConfig, store=None):
        self.config = config
        self.config_hash = config.config_hash()
        if store is None:
            store = ResultStore(config.output_dir, self.config_hash) if config.output_dir else NullStore()
        self.store = store
        self._clean: Optional[Tuple[Dataset, Dataset]] = None
        self._zoo: Dict[str, Dataset] = {}
        self._ensembles: Dict[str, List[Model]] = {}
        self._lyapunov_fit: Optional[ThresholdFit] = None
        self._linear: Optional[LinearClassifier] = None
        log.info(f"Experiment runner for profile '{config.profile}' (config {self.config_hash[:12]})")

    # Parallel helper

    def _map(self, fn: Callable, items: Sequence) -> list:
        if self.config.threads > 1 and len(items) > 1:
            with ThreadPoolExecutor(max_workers=self.config.threads) as pool:
                return list(pool.map(fn, items))
        return [fn(item) for item in items]

    # Data

    def clean_augmented(self) -> Tuple[Dataset, Dataset]:
        """Noise-free Augmented SO (train, test) with raw rasters."""
        if self._clean is None:
            c = self.config
            self._clean = make_augmented_dataset(c.n_train, c.test_size, c.seed, 0.0, c.augment,
                                                 c.grid_size, True, c.threads)
        return self._clean

    def training_set(self, augmented: bool = True) -> Dataset:
        c = self.config
        if augmented:
            clean, _ = self.clean_augmented()
            if c.train_sigma == 0:
                return clean
            return renoise_dataset(clean, c.train_sigma, derived_seed(c.seed, NOISE_STREAM, 0))
        return make_zoo_dataset(SystemName.SO, c.n_train, c.seed, c.train_sigma, c.grid_size, True, "train")

    def clean_test_set(self, system: str) -> Dataset:
        if system == AUGMENTED_SO:
            return self.clean_augmented()[1]
        key = resolve_name(system).value
        if key not in self._zoo:
            c = self.config
            self._zoo[key] = make_zoo_dataset(key, c.test_size, c.seed, 0.0, c.grid_size, True, "test")
        return self._zoo[key]

    def test_set(self, system: str, sigma: float) -> Dataset:
        """Test rasters of `system`; the clean fields are shared across noise levels."""
        clean = self.clean_test_set(system)
        if sigma == 0:
            return clean
        return renoise_dataset(clean, sigma, derived_seed(self.config.seed, NOISE_STREAM, _sigma_key(sigma)))

    @staticmethod
    def fields(dataset: Dataset) -> List[VectorField]:
        grid = grid_from_manifest(dataset.manifest)
        return [field_from_raw(sample.raw, grid) for sample in dataset]

    # Models

    def _checkpoint_path(self, tag: str, run: int) -> Optional[Path]:
        if not self.config.output_dir:
            return None
        return Path(self.config.output_dir) / "models" / self.config_hash[:16] / f"{tag}-run{run}.twck"

    def ensemble(self, tag: str = "full", arch: Optional[ArchConfig] = None, augmented: bool = True) -> List[Model]:
        """
        Train (or reload) `runs` independently seeded models.

        Args:
            tag: Cache name of the ensemble
            arch: Architecture; the configured one when None
            augmented: Train on Augmented SO (else on plain SO rasters)
        """
        if tag in self._ensembles:
            return self._ensembles[tag]
        arch = arch or self.config.arch
        data: Optional[Dataset] = None
        models = []
        for run in range(self.config.runs):
            seed = derived_seed(self.config.seed, RUN_STREAM, run)
            path = self._checkpoint_path(tag, run)
            if path is not None and path.exists():
                model = checkpoint.load(path)
                if model.arch == arch:
                    models.append(model)
                    continue
                log.warning(f"Checkpoint {path} has a different architecture, retraining")
            if data is None:
                data = self.training_set(augmented)
            model = build_model(arch, seed)
            log.info(f"Training {tag} run {run + 1}/{self.config.runs} (seed {seed})")
            train(model, data, replace(self.config.train, seed=seed))
            if path is not None:
                path.parent.mkdir(parents=True, exist_ok=True)
                checkpoint.save(model, path)
            models.append(model)
        self._ensembles[tag] = models
        return models

    def model_accuracies(self, models: Sequence[Model], dataset: Dataset) -> List[float]:
        labels = dataset.labels()
        mc_seed = derived_seed(self.config.seed, MC_STREAM)
        return [float(accuracy_score(labels, predicted_labels(
            predict_dataset(model, dataset, self.config.mc_evals, mc_seed)))) for model in models]

    # Baselines

    def lyapunov_fit(self) -> ThresholdFit:
        """Exponent threshold fit once on an Augmented SO calibration split."""
        if self._lyapunov_fit is None:
            c = self.config

            def compute():
                calibration = make_augmented_split(int(c.lyapunov.get("calibration_size", 200)), "calibration",
                                                   c.seed, 0.0, c.augment, c.grid_size, True, c.threads)
                scores = self._lyapunov_scores(calibration, derived_seed(c.seed, LYAPUNOV_STREAM, 0))
                fit = fit_threshold_roc(scores, calibration.labels())
                return {"threshold": fit.threshold, "youden_j": fit.youden_j, "auc": fit.auc}

            stored = self.store.get_or_compute(cell_key("lyapunov_threshold"), compute)
            self._lyapunov_fit = ThresholdFit(**stored)
        return self._lyapunov_fit

    def _lyapunov_scores(self, dataset: Dataset, seed: int) -> np.ndarray:
        lyap = self.config.lyapunov
        return lyapunov_scores(self.fields(dataset), seed, float(lyap.get("dt", 0.1)),
                               float(lyap.get("horizon", 100.0)), threads=self.config.threads,
                               emb_dim=int(lyap.get("emb_dim", 4)))

    def linear_model(self) -> LinearClassifier:
        """Parameters-baseline classifier fit on the Augmented SO training rasters."""
        if self._linear is None:
            train_set = self.training_set(True)
            features = parameters_features(self.fields(train_set))
            self._linear = linear_fit(features, train_set.labels(), float(self.config.linear.get("lr", 0.01)),
                                      int(self.config.linear.get("epochs", 200)), self.config.seed)
        return self._linear

    def method_accuracies(self, method: str, dataset: Dataset) -> List[float]:
        """Per-run accuracies of one method (a single value for deterministic baselines)."""
        labels = dataset.labels()
        if method == "model":
            return self.model_accuracies(self.ensemble(), dataset)
        if method == "critical_points":
            predicted = self._map(lambda f: int(classify_critical(f)), self.fields(dataset))
            return [float(accuracy_score(labels, predicted))]
        if method == "lyapunov":
            threshold = self.lyapunov_fit().threshold
            scores = self._lyapunov_scores(dataset, derived_seed(self.config.seed, LYAPUNOV_STREAM, 1))
            return [float(accuracy_score(labels, scores_to_labels(scores, threshold)))]
        if method == "parameters":
            predicted = linear_predict(self.linear_model(), parameters_features(self.fields(dataset)))
            return [float(accuracy_score(labels, predicted))]
        raise ConfigError(f"Unknown method '{method}'")

    def row(self, experiment: str, accuracies: Sequence[float], **columns) -> Dict[str, Any]:
        values = np.asarray(accuracies, dtype=np.float64)
        row = {"experiment": experiment, **columns,
               "accuracy_mean": float(values.mean()), "accuracy_std": float(values.std()),
               "runs": int(len(values)), "seed": self.config.seed, "config_hash": self.config_hash}
        return row

    def accuracy_cell(self, system: str, method: str, sigma: float) -> List[float]:
        key = cell_key("accuracy", system, method, _sigma_key(sigma))
        return self.store.get_or_compute(key, lambda: self.method_accuracies(method, self.test_set(system, sigma)))

    # Model-input helpers

    def ensemble_cycle_share(self, models: Sequence[Model], fields: Sequence[VectorField]) -> np.ndarray:
        """Fraction of models predicting a cycle, per field."""
        inputs = np.concatenate([field_input(models[0], f) for f in fields])
        mc_seed = derived_seed(self.config.seed, MC_STREAM)
        votes = [predicted_labels(mc_logits(m, inputs, self.config.mc_evals, mc_seed)) for m in models]
        return np.mean(votes, axis=0)


def _runner(config: ExperimentConfig, runner: Optional[ExperimentRunner]) -> ExperimentRunner:
    return runner if runner is not None else ExperimentRunner(config)


def run_accuracy_table(config: ExperimentConfig, sigma: Optional[float] = None,
                       runner: Optional[ExperimentRunner] = None) -> pd.DataFrame:
    """
    Accuracy of every method on every configured test system.

    Args:
        config: Experiment configuration
        sigma: Test noise level; the configured one when None

    Returns:
        One row per (system, method) with mean and std over re-runs
    """
    runner = _runner(config, runner)
    sigma = config.noise_sigma if sigma is None else sigma
    rows = []
    for system in config.systems:
        for method in config.methods:
            accuracies = runner.accuracy_cell(system, method, sigma)
            rows.append(runner.row("accuracy", accuracies, system=system, method=method, sigma=sigma))
            log.info(f"{system} / {method} at sigma={sigma}: {np.mean(accuracies):.3f}")
    return pd.DataFrame(rows)


def run_noise_sweep(config: ExperimentConfig, runner: Optional[ExperimentRunner] = None) -> pd.DataFrame:
    """
    Accuracy on Augmented SO across noise levels.

    The same clean test fields are re-noised at every level. Each method's
    curve is also reported after non-increasing isotonic smoothing.
    """
    runner = _runner(config, runner)
    sigmas = sorted(config.noise_sigmas)
    rows = []
    for method in config.methods:
        means = []
        for sigma in sigmas:
            accuracies = runner.accuracy_cell(AUGMENTED_SO, method, sigma)
            rows.append(runner.row("noise", accuracies, system=AUGMENTED_SO, method=method, sigma=sigma))
            means.append(rows[-1]["accuracy_mean"])
        smoothed = IsotonicRegression(increasing=False).fit_transform(sigmas, means)
        for row, value in zip(rows[-len(sigmas):], smoothed):
            row["accuracy_smoothed"] = float(value)
    return pd.DataFrame(rows)


def _grid_axes(system: str, resolution: int) -> Tuple[SystemName, np.ndarray, np.ndarray, np.ndarray]:
    key = resolve_name(system)
    ranges = param_ranges(key)
    if len(ranges) < 2:
        raise ConfigError(f"Boundary maps need two parameters; {key.value} has {len(ranges)}")
    xs = np.linspace(*ranges[0], resolution)
    ys = np.linspace(*ranges[1], resolution)
    base = np.array([0.5 * (lo + hi) for lo, hi in ranges])
    return key, xs, ys, base


def run_boundary_map(config: ExperimentConfig, system: str = "simple_oscillator",
                     resolution: Optional[int] = None, runner: Optional[ExperimentRunner] = None) -> BoundaryMap:
    """
    Mean cycle prediction of the trained ensemble over a parameter grid.

    The first two parameters span the grid, further parameters sit at
    mid-range. The true boundary is attached as the overlay.
    """
    runner = _runner(config, runner)
    resolution = resolution or config.boundary_resolution
    key, xs, ys, base = _grid_axes(system, resolution)

    def compute():
        models = runner.ensemble()
        fields, truth = [], []
        for y in ys:
            for x in xs:
                theta = base.copy()
                theta[0], theta[1] = x, y
                spec = make_system(key, theta)
                fields.append(rasterize(spec, default_grid(spec, config.arch.input_size)))
                truth.append(int(true_label(spec)))
        share = runner.ensemble_cycle_share(models, fields)
        return {"values": share.tolist(), "truth": truth, "runs": len(models)}

    cell = runner.store.get_or_compute(cell_key("boundary", key.value, resolution), compute)
    shape = (len(ys), len(xs))
    overlay = [line[:, :2] for line in boundary_curve(key)]
    boundary = BoundaryMap(key.value, tuple(param_names(key)[:2]), xs, ys,
                           np.asarray(cell["values"]).reshape(shape), int(cell["runs"]), overlay,
                           np.asarray(cell["truth"]).reshape(shape))
    log.info(f"Boundary map {key.value} {resolution}x{resolution}: accuracy {boundary.accuracy():.3f}")
    return boundary


def confidence_vs_distance(config: ExperimentConfig, system: str = "simple_oscillator",
                           runner: Optional[ExperimentRunner] = None) -> CorrelationReport:
    """Correlate the ensemble's cycle probability with the signed parametric distance."""
    runner = _runner(config, runner)
    dataset = runner.test_set(system, config.noise_sigma)
    mc_seed = derived_seed(config.seed, MC_STREAM)
    probabilities = np.mean([expit(predict_dataset(m, dataset, config.mc_evals, mc_seed)[:, 1])
                             for m in runner.ensemble()], axis=0)
    return correlation_report(probabilities, dataset.distances(), dataset.labels(), system)


def repressilator_axes(size: int) -> Tuple[np.ndarray, np.ndarray]:
    """Cell-centred (alpha, beta) axes of the study grid."""
    centres = (np.arange(size) + 0.5) / size
    return centres * REPRESSILATOR_ALPHA_MAX, centres * REPRESSILATOR_BETA_MAX


def repressilator_field(config: ExperimentConfig, alpha: float, beta: float, seed: int) -> VectorField:
    """Simulated cells of one (alpha, beta) interpolated onto the model lattice."""
    r = config.repressilator
    scattered = simulate_repressilator_sample(alpha, beta, int(r.get("n_cells", 100)),
                                              float(r.get("noise_sigma", 0.5)), seed,
                                              float(r.get("horizon", 50.0)), float(r.get("dt", 0.1)))
    return scattered_to_field(scattered, config.arch.input_size, int(r.get("neighbors", 8)),
                              float(r.get("power", 2.0)))


def run_repressilator_study(config: ExperimentConfig, size: Optional[int] = None,
                            runner: Optional[ExperimentRunner] = None) -> BoundaryMap:
    """
    Classify simulated repressilator cell samples over an (alpha, beta) grid.

    Ground truth comes from the analytic oscillation window; cells without a
    window are point attractors.
    """
    runner = _runner(config, runner)
    size = size or config.repressilator_grid
    alphas, betas = repressilator_axes(size)

    def compute():
        models = runner.ensemble()
        fields, truth = [], []
        for j, beta in enumerate(betas):
            for i, alpha in enumerate(alphas):
                fields.append(repressilator_field(config, float(alpha), float(beta),
                                                  derived_seed(config.seed, CELL_STREAM, j, i)))
                truth.append(int(repressilator_label(float(alpha), float(beta))))
        share = runner.ensemble_cycle_share(models, fields)
        return {"values": share.tolist(), "truth": truth, "runs": len(models)}

    cell = runner.store.get_or_compute(cell_key("repressilator", size), compute)
    shape = (size, size)
    study = BoundaryMap(SystemName.REPRESSILATOR.value, ("alpha", "beta"), alphas, betas,
                        np.asarray(cell["values"]).reshape(shape), int(cell["runs"]),
                        [np.asarray(repressilator_curve())], np.asarray(cell["truth"]).reshape(shape))
    log.info(f"Repressilator {size}x{size}: accuracy {study.accuracy():.3f}")
    return study


def _variant_rows(runner: ExperimentRunner, experiment: str, variant: str, models: Sequence[Model],
                  systems: Sequence[str], **columns) -> List[Dict[str, Any]]:
    rows = []
    for system in systems:
        key = cell_key(experiment, variant, system, _sigma_key(runner.config.noise_sigma))
        accuracies = runner.store.get_or_compute(
            key, lambda: runner.model_accuracies(models, runner.test_set(system, runner.config.noise_sigma)))
        rows.append(runner.row(experiment, accuracies, variant=variant, system=system,
                               sigma=runner.config.noise_sigma, **columns))
    return rows


def run_ablations(config: ExperimentConfig, runner: Optional[ExperimentRunner] = None) -> pd.DataFrame:
    """
    Accuracy of the full model and its ablations on every configured system.

    Variants switch off attention, consume raw vectors, skip augmentation
    (plain SO training) or all three at once.
    """
    runner = _runner(config, runner)
    rows = []
    for variant, changes in ABLATIONS.items():
        arch = replace(config.arch, **changes)
        models = runner.ensemble("full" if variant == "full" else variant, arch,
                                 augmented=variant not in UNAUGMENTED_VARIANTS)
        rows.extend(_variant_rows(runner, "ablation", variant, models, config.systems))
    return pd.DataFrame(rows)


def fixed_point_spread(augment: AugmentConfig, count: int, seed: int) -> float:
    """Mean per-axis std of accepted pushed-forward SO fixed points."""
    rng = derive_rng(seed, PROBE_STREAM)
    spec = make_system(SystemName.SO, (0.0, 0.0))
    locations = []
    while len(locations) < count:
        diffeo = sample_diffeo(rng, augment.bound, augment.bins, 2, augment.min_width,
                               augment.min_height, augment.min_derivative)
        if fixed_point_in_frame(spec, diffeo, augment.frame):
            locations.append(fixed_point_location(spec, diffeo, augment.frame))
    return float(np.mean(np.std(np.array(locations), axis=0)))


def run_bound_sweep(config: ExperimentConfig, bounds: Sequence[float] = DEFAULT_BOUNDS,
                    systems: Sequence[str] = (AUGMENTED_SO, "bzreaction", "lienard_poly")) -> pd.DataFrame:
    """Retrain with each spline bound B and report accuracy and fixed-point spread."""
    rows = []
    for bound in bounds:
        frame = min(config.augment.frame, float(bound))
        sub = ExperimentRunner(config.with_changes(augment=replace(config.augment, bound=float(bound), frame=frame)))
        models = sub.ensemble()
        spread = fixed_point_spread(sub.config.augment, PROBE_SIZE, config.seed)
        acceptance = sub.clean_augmented()[0].manifest["augmentation"]["acceptance_rate"]
        rows.extend(_variant_rows(sub, "bound", f"B={bound:g}", models, systems, bound=float(bound),
                                  fixed_point_spread=spread, acceptance_rate=acceptance))
    return pd.DataFrame(rows)


def run_datasize_sweep(config: ExperimentConfig, sizes: Sequence[int] = DEFAULT_SIZES) -> pd.DataFrame:
    """Retrain with each training-set size."""
    rows = []
    for n_train in sizes:
        sub = ExperimentRunner(config.with_changes(n_train=int(n_train)))
        rows.extend(_variant_rows(sub, "datasize", f"n={n_train}", sub.ensemble(), config.systems,
                                  n_train=int(n_train)))
    return pd.DataFrame(rows)


def arch_variants(arch: ArchConfig) -> Dict[str, ArchConfig]:
    return {
        "dropout_0.5": replace(arch, dropout=0.5),
        "kernel_5": replace(arch, kernel_size=5),
        "latent_5": replace(arch, latent_dim=5),
        "latent_20": replace(arch, latent_dim=20),
        "channels_32": replace(arch, channels=tuple(32 for _ in arch.channels)),
        "three_layers": replace(arch, channels=arch.channels[:3]),
    }


def run_arch_variants(config: ExperimentConfig, runner: Optional[ExperimentRunner] = None) -> pd.DataFrame:
    """Accuracy of architecture variants trained on the same Augmented SO data."""
    runner = _runner(config, runner)
    rows = []
    for variant, arch in arch_variants(config.arch).items():
        rows.extend(_variant_rows(runner, "arch", variant, runner.ensemble(variant, arch), config.systems))
    return pd.DataFrame(rows)


def run_subhopf_probe(config: ExperimentConfig, models: Optional[Sequence[Model]] = None,
                      mus: Sequence[float] = SUBHOPF_MUS, count: int = PROBE_SIZE,
                      runner: Optional[ExperimentRunner] = None) -> pd.DataFrame:
    """
    Mean point logit of trained models on subcritical Hopf rasters per regime.

    Frequencies and the remaining parameter are drawn per sample; mu is fixed
    per regime.
    """
    if models is None:
        models = _runner(config, runner).ensemble()
    mc_seed = derived_seed(config.seed, MC_STREAM)
    rows = []
    for index, mu in enumerate(mus):
        thetas = sample_params(SystemName.SUBCRITICAL_HOPF, count, derive_rng(config.seed, PROBE_STREAM, index))
        thetas[:, 0] = mu
        systems = [make_system(SystemName.SUBCRITICAL_HOPF, theta) for theta in thetas]
        fields = [rasterize(s, default_grid(s, config.arch.input_size)) for s in systems]
        inputs = np.concatenate([field_input(models[0], f) for f in fields])
        per_run = [float(mc_logits(m, inputs, config.mc_evals, mc_seed)[:, 0].mean()) for m in models]
        rows.append({"experiment": "subhopf_probe", "mu": float(mu), "regime": subhopf_regime(systems[0]).value,
                     "point_logit_mean": float(np.mean(per_run)), "point_logit_std": float(np.std(per_run)),
                     "runs": len(per_run), "samples": count, "seed": config.seed,
                     "config_hash": config.config_hash()})
        log.info(f"subhopf mu={mu}: mean point logit {rows[-1]['point_logit_mean']:.3f}")
    return pd.DataFrame(rows)
