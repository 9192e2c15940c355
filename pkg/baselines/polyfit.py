"""
baselines/polyfit.py

"Parameters" baseline: each velocity component is fit by a cubic polynomial
in (x, y), and the 20 coefficients feed a standardized logistic-regression
classifier.
"""

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy.linalg import solve_triangular
from sklearn.linear_model import SGDClassifier
from sklearn.preprocessing import StandardScaler

from models.field import VectorField
from models.system import DynClass
from utils.errors import DegenerateLabels
from utils.logging_utils import get_module_logger

# Get module logger
log = get_module_logger()

# Monomials x^i y^j in graded order: 1, x, y, x^2, xy, y^2, x^3, x^2 y, x y^2, y^3
MONOMIALS = [(i - j, j) for i in range(4) for j in range(i + 1)]


def cubic_basis(points: np.ndarray) -> np.ndarray:
    """(N, 10) design matrix of the cubic monomials at (N, 2) points."""
    x, y = points[:, 0], points[:, 1]
    return np.stack([x ** i * y ** j for i, j in MONOMIALS], axis=1)


def _least_squares(field: VectorField):
    design = cubic_basis(field.grid.lattice().reshape(-1, 2))
    targets = np.stack([field.u.ravel(), field.v.ravel()], axis=1)
    q, r = np.linalg.qr(design)
    coeffs = solve_triangular(r, q.T @ targets)
    return coeffs, targets - design @ coeffs


def polyfit_coeffs(field: VectorField) -> np.ndarray:
    """
    Least-squares cubic coefficients of a raster.

    Returns:
        20-vector (c_0..c_9 for u, d_0..d_9 for v) in MONOMIALS order
    """
    coeffs, _ = _least_squares(field)
    return np.concatenate([coeffs[:, 0], coeffs[:, 1]])


def polyfit_residual(field: VectorField) -> float:
    """Root-mean-square residual of the cubic fit over both components."""
    _, residual = _least_squares(field)
    return float(np.sqrt(np.mean(residual ** 2)))


@dataclass
class LinearClassifier:
    """Logistic-regression weights over standardized features."""

    weights: np.ndarray
    bias: float
    mean: np.ndarray
    scale: np.ndarray

    @property
    def n_features(self) -> int:
        return len(self.weights)

    def decision(self, features: np.ndarray) -> np.ndarray:
        return ((features - self.mean) / self.scale) @ self.weights + self.bias


def linear_fit(features, labels, lr: float = 0.01, epochs: int = 200, seed: int = 0) -> LinearClassifier:
    """
    Fit a logistic-regression classifier by stochastic gradient descent.

    Args:
        features: (N, F) feature matrix
        labels: 0/1 labels
        lr: Constant learning rate
        epochs: Passes over the data
        seed: Shuffling seed; refits with the same seed are identical

    Raises:
        DegenerateLabels: only one class is present
    """
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels).astype(np.int64)
    if len(np.unique(labels)) < 2:
        error_msg = f"Linear classifier needs both classes, got labels {np.unique(labels).tolist()}"
        log.error(error_msg)
        raise DegenerateLabels(error_msg)

    scaler = StandardScaler().fit(features)
    sgd = SGDClassifier(loss="log_loss", learning_rate="constant", eta0=lr, max_iter=epochs,
                        tol=None, random_state=seed)
    sgd.fit(scaler.transform(features), labels)
    log.debug(f"Linear classifier fit on {features.shape[0]} samples x {features.shape[1]} features")
    return LinearClassifier(sgd.coef_[0].copy(), float(sgd.intercept_[0]),
                            scaler.mean_.copy(), scaler.scale_.copy())


def linear_predict(model: LinearClassifier, features) -> Union[DynClass, np.ndarray]:
    """DynClass for one feature vector, an array of 0/1 labels for a matrix."""
    features = np.asarray(features, dtype=np.float64)
    if features.shape[-1] != model.n_features:
        raise ValueError(f"Classifier expects {model.n_features} features, got {features.shape[-1]}")
    labels = (model.decision(np.atleast_2d(features)) > 0).astype(np.int64)
    return DynClass(int(labels[0])) if features.ndim == 1 else labels


def parameters_features(fields: Sequence[VectorField]) -> np.ndarray:
    """(N, 20) coefficient matrix of a batch of rasters."""
    return np.stack([polyfit_coeffs(f) for f in fields])
