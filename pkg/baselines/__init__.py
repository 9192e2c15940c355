"""
Baselines package for TopoHopf: classical point/cycle detectors used as
reference methods in the experiment tables.
"""

from baselines.critical_points import CriticalKind, CriticalPoint, classify_critical, find_critical_points
from baselines.lyapunov import classify_lyapunov, lyapunov_max, lyapunov_scores
from baselines.polyfit import LinearClassifier, linear_fit, linear_predict, polyfit_coeffs, polyfit_residual
from baselines.roc import ThresholdFit, fit_threshold_roc

__all__ = [
    'CriticalKind', 'CriticalPoint', 'classify_critical', 'find_critical_points',
    'classify_lyapunov', 'lyapunov_max', 'lyapunov_scores',
    'LinearClassifier', 'linear_fit', 'linear_predict', 'polyfit_coeffs', 'polyfit_residual',
    'ThresholdFit', 'fit_threshold_roc',
]
