"""
baselines/lyapunov.py

Maximal Lyapunov exponent baseline. Trajectories are integrated from a
seeded interior start point and the exponent of one scalar coordinate is
estimated with Rosenstein's method as implemented by `nolds.lyap_r`.
"""

from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence, Union

import nolds
import numpy as np

from dynamics.odeint import integrate
from dynamics.rasterize import bilinear_sampler, derive_rng
from dynamics.systemzoo import eval_rhs
from models.field import VectorField
from models.system import DynClass, SystemSpec
from utils.errors import NoValidNeighbors, NumericError, TooShort
from utils.logging_utils import get_module_logger

# Get module logger
log = get_module_logger()

MIN_SERIES_LENGTH = 200
EMBEDDING_DIM = 4
FALLBACK_LAG = 10
# nolds fits the whole divergence curve; 20 steps is the first third of a 60-step curve
TRAJECTORY_LENGTH = 20
MIN_NEIGHBORS = 20
START_FRACTION = 0.8

Target = Union[SystemSpec, VectorField]


def autocorrelation_lag(series: np.ndarray, fallback: int = FALLBACK_LAG) -> int:
    """First lag at which the autocorrelation crosses zero."""
    centered = series - series.mean()
    n = len(centered)
    spectrum = np.fft.rfft(centered, 2 * n)
    acf = np.fft.irfft(spectrum * np.conj(spectrum))[:n]
    if acf[0] <= 0:
        return fallback
    crossings = np.flatnonzero(acf <= 0)
    return int(crossings[0]) if len(crossings) else fallback


def mean_period(series: np.ndarray) -> int:
    """Inverse mean frequency of the power spectrum, in samples, capped at a quarter of the series."""
    n = len(series)
    power = np.abs(np.fft.rfft(series - series.mean())) ** 2
    freqs = np.fft.rfftfreq(n)
    total = power[1:].sum()
    if total <= 0:
        return 0
    mean_freq = float(np.sum(freqs[1:] * power[1:]) / total)
    return int(min(np.ceil(1.0 / mean_freq), 0.25 * n))


def delay_embedding(series: np.ndarray, dim: int, lag: int) -> np.ndarray:
    if len(series) - (dim - 1) * lag <= 0:
        raise TooShort(f"Series of length {len(series)} is too short for embedding dim {dim}, lag {lag}")
    return nolds.measures.delay_embedding(np.asarray(series), dim, lag=lag)


def lyapunov_max(series, dt: float = 1.0, emb_dim: int = EMBEDDING_DIM, lag: Optional[int] = None,
                 trajectory_len: int = TRAJECTORY_LENGTH) -> float:
    """
    Rosenstein estimate of the largest Lyapunov exponent.

    The lag defaults to the first autocorrelation zero crossing and the
    temporal exclusion window is one mean period; both are passed to
    `nolds.lyap_r` explicitly, which fits a least-squares line to the mean
    log divergence over `trajectory_len` steps.

    Args:
        series: Scalar time series
        dt: Sampling interval; the slope is divided by it
        emb_dim: Embedding dimension
        lag: Embedding lag; the first autocorrelation zero crossing when None
        trajectory_len: Length of the fitted divergence curve

    Returns:
        Exponent per unit time

    Raises:
        TooShort: fewer than 200 samples
        NoValidNeighbors: too few neighbour pairs outside the exclusion window,
            or a divergence curve that collapses to zero distance
    """
    series = np.asarray(series, dtype=np.float64).ravel()
    if len(series) < MIN_SERIES_LENGTH:
        error_msg = f"Lyapunov estimation needs at least {MIN_SERIES_LENGTH} samples, got {len(series)}"
        log.error(error_msg)
        raise TooShort(error_msg)
    if lag is None:
        lag = autocorrelation_lag(series)
    min_tsep = mean_period(series)

    try:
        exponent = nolds.lyap_r(series, emb_dim=emb_dim, lag=lag, min_tsep=min_tsep, tau=dt,
                                min_neighbors=MIN_NEIGHBORS, trajectory_len=trajectory_len, fit="poly")
    except ValueError as e:
        error_msg = f"No valid neighbours in a series of length {len(series)} (exclusion window {min_tsep}): {e}"
        log.error(error_msg)
        raise NoValidNeighbors(error_msg) from e
    if not np.isfinite(exponent):
        raise NoValidNeighbors("Divergence curve collapsed to zero distance")
    return float(exponent)


def start_point(extent, rng: np.random.Generator) -> np.ndarray:
    """Uniform start point in the central part of the extent."""
    lo = np.array([e[0] for e in extent])
    hi = np.array([e[1] for e in extent])
    margin = 0.5 * (1.0 - START_FRACTION) * (hi - lo)
    return rng.uniform(lo + margin, hi - margin)


def _rhs(target: Target):
    if isinstance(target, VectorField):
        return bilinear_sampler(target), target.grid.extent
    return (lambda state: eval_rhs(target, state)), target.extent


def trajectory_exponent(target: Target, rng: np.random.Generator, dt: float = 0.1, horizon: float = 100.0,
                        coordinate: int = 0, emb_dim: int = EMBEDDING_DIM) -> float:
    """Integrate `target` from a random interior point and estimate the exponent of one coordinate."""
    rhs, extent = _rhs(target)
    trajectory = integrate(rhs, start_point(extent, rng), dt, horizon)
    return lyapunov_max(trajectory.states[:, coordinate], dt, emb_dim)


def classify_lyapunov(target: Target, threshold: float, rng=None, dt: float = 0.1, horizon: float = 100.0,
                      coordinate: int = 0, emb_dim: int = EMBEDDING_DIM) -> DynClass:
    """
    Threshold the maximal Lyapunov exponent.

    Args:
        target: System (integrated exactly) or raster (bilinear velocity lookup)
        threshold: Exponent above which the system is called periodic
        rng: Generator or seed for the start point
        emb_dim: Embedding dimension of the scalar series

    Returns:
        DynClass
    """
    exponent = trajectory_exponent(target, np.random.default_rng(rng), dt, horizon, coordinate, emb_dim)
    return DynClass.CYCLE if exponent > threshold else DynClass.POINT


def lyapunov_scores(targets: Sequence[Target], seed: int, dt: float = 0.1, horizon: float = 100.0,
                    coordinate: int = 0, threads: int = 1, emb_dim: int = EMBEDDING_DIM) -> np.ndarray:
    """
    Exponent of every target; start point i draws from (seed, i).

    Targets whose integration diverges or whose series has no valid
    neighbours score NaN.
    """
    def score(i: int) -> float:
        try:
            return trajectory_exponent(targets[i], derive_rng(seed, i), dt, horizon, coordinate, emb_dim)
        except NumericError as e:
            log.debug(f"Sample {i}: {e}")
            return float("nan")

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            scores = np.array(list(pool.map(score, range(len(targets)))), dtype=np.float64)
    else:
        scores = np.array([score(i) for i in range(len(targets))], dtype=np.float64)
    failures = int(np.isnan(scores).sum())
    if failures:
        log.warning(f"Lyapunov estimate failed for {failures}/{len(targets)} samples")
    return scores


def scores_to_labels(scores: np.ndarray, threshold: float) -> np.ndarray:
    """Cycle where the exponent exceeds the threshold; NaN scores count as point."""
    with np.errstate(invalid="ignore"):
        return (np.nan_to_num(scores, nan=-np.inf) > threshold).astype(np.int64)
