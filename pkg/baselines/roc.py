"""
baselines/roc.py

Score threshold selection by Youden's J over the empirical ROC curve.
"""

from dataclasses import dataclass

import numpy as np
from sklearn.metrics import roc_auc_score

from utils.errors import DegenerateLabels
from utils.logging_utils import get_module_logger

# Get module logger
log = get_module_logger()


@dataclass(frozen=True)
class ThresholdFit:
    threshold: float
    youden_j: float
    auc: float


def youden_j(scores: np.ndarray, labels: np.ndarray, threshold: float) -> float:
    """Sensitivity + specificity - 1 when scores above `threshold` are called positive."""
    predicted = scores > threshold
    positives = labels == 1
    sensitivity = np.mean(predicted[positives])
    specificity = np.mean(~predicted[~positives])
    return float(sensitivity + specificity - 1.0)


def fit_threshold_roc(scores, labels) -> ThresholdFit:
    """
    Threshold maximizing Youden's J.

    Every midpoint between consecutive distinct scores is tried; among
    equally good thresholds the smallest wins. Non-finite scores are dropped.

    Args:
        scores: Per-sample scores, larger meaning more likely periodic
        labels: 0/1 labels

    Returns:
        ThresholdFit with the threshold, its J and the ROC AUC

    Raises:
        DegenerateLabels: only one class is present
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels).astype(np.int64)
    finite = np.isfinite(scores)
    if not finite.all():
        log.warning(f"Dropping {int((~finite).sum())} non-finite scores before the ROC fit")
        scores, labels = scores[finite], labels[finite]
    if len(np.unique(labels)) < 2:
        error_msg = f"ROC threshold needs both classes, got labels {np.unique(labels).tolist()}"
        log.error(error_msg)
        raise DegenerateLabels(error_msg)

    distinct = np.unique(scores)
    candidates = 0.5 * (distinct[:-1] + distinct[1:]) if len(distinct) > 1 else distinct
    js = np.array([youden_j(scores, labels, t) for t in candidates])
    best = int(np.argmax(js))
    fit = ThresholdFit(float(candidates[best]), float(js[best]), float(roc_auc_score(labels, scores)))
    log.info(f"ROC threshold {fit.threshold:.4g} (J={fit.youden_j:.3f}, AUC={fit.auc:.3f})")
    return fit
