"""
dynamics/warp.py

Random bounded monotone rational-quadratic spline diffeomorphisms and the
topologically augmented simple-oscillator dataset built from them.

A diffeo acts per axis on [-B, B] and is the identity outside. Phase-space
coordinates are mapped affinely from the system extent onto the frame
[-F, F] before warping; F = 1 puts the simple oscillator in its own
coordinates, F = B spreads every extent over the whole spline box.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.special import softmax

from dynamics.rasterize import (NOISE_CONVENTION, add_noise, check_extent, default_grid,
                                derive_rng, make_sample, provenance, split_code)
from dynamics.systemzoo import (boundary_distance, eval_rhs, fixed_point, make_system,
                                param_names, sample_params, true_label)
from models.dataset import Dataset, LabeledSample
from models.diffeo import Diffeo
from models.field import GridSpec, VectorField
from models.system import SystemName, SystemSpec
from utils.errors import ConfigError
from utils.logging_utils import get_module_logger

# Get module logger
log = get_module_logger()

NORMALIZATION = "affine_extent_to_frame"


@dataclass(frozen=True)
class AugmentConfig:
    """Spline family and normalization used for topological augmentation."""

    bound: float = 4.0
    bins: int = 5
    frame: float = 1.0
    min_width: float = 1e-3
    min_height: float = 1e-3
    min_derivative: float = 1e-3
    max_attempts: int = 10000

    def __post_init__(self):
        if self.bound <= 0 or self.bins < 1:
            raise ConfigError(f"Spline needs B > 0 and K >= 1, got B={self.bound}, K={self.bins}")
        if not 0 < self.frame <= self.bound:
            raise ConfigError(f"Frame half-width {self.frame} must lie in (0, B={self.bound}]")
        if self.min_width * self.bins >= 1 or self.min_height * self.bins >= 1:
            raise ConfigError(f"Bin floors too large for {self.bins} bins")

    def to_dict(self) -> dict:
        data = asdict(self)
        data["normalization"] = NORMALIZATION
        return data


def _softplus(x: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, x)


def diffeo_from_raw(raw_widths, raw_heights, raw_derivatives, bound: float = 4.0,
                    min_width: float = 1e-3, min_height: float = 1e-3,
                    min_derivative: float = 1e-3, diffeo_id: str = "raw") -> Diffeo:
    """
    Map unconstrained spline parameters to a valid Diffeo.

    Bin fractions are floor + (1 - K*floor) * softmax(raw); interior derivatives
    are 1 + softplus(raw + c) - softplus(c) with c = log(expm1(1 - floor)),
    which is floor + softplus(raw + c) written so that a raw value of 0 gives
    derivative 1 exactly. All-zero raws therefore give the identity map.

    Args:
        raw_widths: (dims, K) unconstrained widths
        raw_heights: (dims, K) unconstrained heights
        raw_derivatives: (dims, K-1) unconstrained interior derivatives
        bound: Half-width B of the active box

    Returns:
        The Diffeo
    """
    raw_widths = np.atleast_2d(np.asarray(raw_widths, dtype=np.float64))
    raw_heights = np.atleast_2d(np.asarray(raw_heights, dtype=np.float64))
    dims, bins = raw_widths.shape
    raw_derivatives = np.asarray(raw_derivatives, dtype=np.float64).reshape(dims, bins - 1)

    widths = 2.0 * bound * (min_width + (1.0 - min_width * bins) * softmax(raw_widths, axis=1))
    heights = 2.0 * bound * (min_height + (1.0 - min_height * bins) * softmax(raw_heights, axis=1))

    shift = np.log(np.expm1(1.0 - min_derivative))
    interior = 1.0 + (_softplus(raw_derivatives + shift) - _softplus(shift))
    derivatives = np.ones((dims, bins + 1))
    derivatives[:, 1:-1] = interior

    return Diffeo(widths, heights, derivatives, float(bound), diffeo_id)


def sample_diffeo(rng, bound: float = 4.0, bins: int = 5, dims: int = 2,
                  min_width: float = 1e-3, min_height: float = 1e-3,
                  min_derivative: float = 1e-3, diffeo_id: Optional[str] = None) -> Diffeo:
    """
    Draw a random spline diffeo with standard-normal raw parameters.

    Args:
        rng: numpy Generator or integer seed
        bound: Half-width B of the active box
        bins: Number of bins K

    Returns:
        The sampled Diffeo
    """
    if bound <= 0 or bins < 1:
        raise ConfigError(f"Spline needs B > 0 and K >= 1, got B={bound}, K={bins}")
    if diffeo_id is None and isinstance(rng, (int, np.integer)):
        diffeo_id = f"seed-{int(rng)}"
    rng = np.random.default_rng(rng)
    raw_widths = rng.standard_normal((dims, bins))
    raw_heights = rng.standard_normal((dims, bins))
    raw_derivatives = rng.standard_normal((dims, bins - 1))
    return diffeo_from_raw(raw_widths, raw_heights, raw_derivatives, bound,
                           min_width, min_height, min_derivative, diffeo_id or "sampled")


def _bin_terms(diffeo: Diffeo, dim: int, values: np.ndarray, knots: np.ndarray):
    index = np.clip(np.searchsorted(knots, values, side="right") - 1, 0, diffeo.bins - 1)
    kx, ky = diffeo.knots_x[dim], diffeo.knots_y[dim]
    x0, x1 = kx[index], kx[index + 1]
    y0, y1 = ky[index], ky[index + 1]
    d0 = diffeo.derivatives[dim, index]
    d1 = diffeo.derivatives[dim, index + 1]
    return x0, x1, y0, y1, d0, d1


def _forward_1d(diffeo: Diffeo, dim: int, x: np.ndarray) -> np.ndarray:
    out = x.copy()
    inside = np.abs(x) < diffeo.bound
    if not np.any(inside):
        return out
    xi = x[inside]
    x0, x1, y0, y1, d0, d1 = _bin_terms(diffeo, dim, xi, diffeo.knots_x[dim])
    slope = (y1 - y0) / (x1 - x0)
    z = (xi - x0) / (x1 - x0)
    zz = z * (1.0 - z)
    out[inside] = y0 + (y1 - y0) * (slope * z * z + d0 * zz) / (slope + (d0 + d1 - 2.0 * slope) * zz)
    return out


def _inverse_1d(diffeo: Diffeo, dim: int, y: np.ndarray) -> np.ndarray:
    out = y.copy()
    inside = np.abs(y) < diffeo.bound
    if not np.any(inside):
        return out
    yi = y[inside]
    x0, x1, y0, y1, d0, d1 = _bin_terms(diffeo, dim, yi, diffeo.knots_y[dim])
    height = y1 - y0
    slope = height / (x1 - x0)
    offset = yi - y0
    curvature = d0 + d1 - 2.0 * slope
    a = height * (slope - d0) + offset * curvature
    b = height * d0 - offset * curvature
    c = -slope * offset
    disc = np.maximum(b * b - 4.0 * a * c, 0.0)
    z = 2.0 * c / (-b - np.sqrt(disc))
    out[inside] = x0 + z * (x1 - x0)
    return out


def _apply(diffeo: Diffeo, point, kernel) -> np.ndarray:
    p = np.asarray(point, dtype=np.float64)
    if p.shape[-1] != diffeo.dims:
        raise ValueError(f"Diffeo acts on {diffeo.dims} dimensions, got points of shape {p.shape}")
    if diffeo.is_identity:
        return p.copy()
    flat = p.reshape(-1, diffeo.dims)
    out = np.empty_like(flat)
    for dim in range(diffeo.dims):
        out[:, dim] = kernel(diffeo, dim, flat[:, dim])
    return out.reshape(p.shape)


def forward(diffeo: Diffeo, point) -> np.ndarray:
    """Apply the spline per axis; identity outside [-B, B]."""
    return _apply(diffeo, point, _forward_1d)


def inverse(diffeo: Diffeo, point) -> np.ndarray:
    """Analytic per-bin inverse of forward."""
    return _apply(diffeo, point, _inverse_1d)


def to_frame(points, extent, frame: float) -> np.ndarray:
    """Affine map from the phase-space extent onto [-frame, frame]."""
    lo = np.array([e[0] for e in extent], dtype=np.float64)
    hi = np.array([e[1] for e in extent], dtype=np.float64)
    return -frame + 2.0 * frame * (np.asarray(points, dtype=np.float64) - lo) / (hi - lo)


def from_frame(points, extent, frame: float) -> np.ndarray:
    lo = np.array([e[0] for e in extent], dtype=np.float64)
    hi = np.array([e[1] for e in extent], dtype=np.float64)
    return lo + (np.asarray(points, dtype=np.float64) + frame) * (hi - lo) / (2.0 * frame)


def warp_field(system: SystemSpec, diffeo: Diffeo, grid: GridSpec, frame: float = 1.0) -> VectorField:
    """
    Rasterize g(Y) = f(h^-1(Y)) on the lattice.

    Args:
        system: Planar system whose extent equals the grid extent
        diffeo: Spline diffeo acting in frame coordinates
        grid: Output lattice
        frame: Half-width F of the frame the extent is mapped onto

    Returns:
        The augmented VectorField
    """
    check_extent(system, grid)
    lattice = grid.lattice()
    if diffeo.is_identity:
        sources = lattice
    else:
        sources = from_frame(inverse(diffeo, to_frame(lattice, grid.extent, frame)), grid.extent, frame)
    velocities = eval_rhs(system, sources)
    return VectorField(velocities[..., 0], velocities[..., 1], grid, provenance(system, diffeo.id))


def fixed_point_location(system: SystemSpec, diffeo: Diffeo, frame: float = 1.0) -> np.ndarray:
    """Phase-space position of the pushed-forward analytic fixed point."""
    extent = system.extent[:2]
    moved = forward(diffeo, to_frame(fixed_point(system), extent, frame))
    return from_frame(moved, extent, frame)


def fixed_point_in_frame(system: SystemSpec, diffeo: Diffeo, frame: float = 1.0) -> bool:
    """True iff the pushed-forward fixed point stays inside the grid extent."""
    moved = forward(diffeo, to_frame(fixed_point(system), system.extent[:2], frame))
    return bool(np.all(np.abs(moved) <= frame))


def _augmented_sample(seed: int, code: int, index: int, sigma: float, augment: AugmentConfig,
                      grid: GridSpec, keep_raw: bool) -> Tuple[LabeledSample, int]:
    rng = derive_rng(seed, code, index)
    theta = sample_params(SystemName.SO, 1, rng)[0]
    system = make_system(SystemName.SO, theta)

    for attempt in range(augment.max_attempts):
        diffeo = sample_diffeo(rng, augment.bound, augment.bins, 2, augment.min_width,
                               augment.min_height, augment.min_derivative,
                               diffeo_id=f"{seed}-{code}-{index}-{attempt}")
        if fixed_point_in_frame(system, diffeo, augment.frame):
            break
    else:
        error_msg = (f"No in-frame diffeo after {augment.max_attempts} draws "
                     f"(B={augment.bound}, frame={augment.frame})")
        log.error(error_msg)
        raise ConfigError(error_msg)

    field = warp_field(system, diffeo, grid, augment.frame)
    field = add_noise(field, sigma, rng)
    sample = make_sample(field, true_label(system), theta, boundary_distance(system), keep_raw)
    return sample, attempt


def make_augmented_split(count: int, split: str, seed: int, sigma: float = 0.0,
                         augment: Optional[AugmentConfig] = None, size: int = 64,
                         keep_raw: bool = True, threads: int = 1) -> Dataset:
    """One Augmented SO split; `split` selects the seed stream (train, test, calibration, ...)."""
    augment = augment or AugmentConfig()
    code = split_code(split)
    grid = default_grid(make_system(SystemName.SO, (0.0, 0.0)), size)

    def build(index: int):
        return _augmented_sample(seed, code, index, sigma, augment, grid, keep_raw)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(build, range(count)))
    else:
        results = [build(index) for index in range(count)]

    samples = [sample for sample, _ in results]
    rejections = sum(rejected for _, rejected in results)
    acceptance = count / (count + rejections)
    if rejections:
        log.debug(f"{split}: rejected {rejections} out-of-frame diffeos (acceptance {acceptance:.3f})")

    cycles = sum(int(s.label) for s in samples)
    if abs(cycles / count - 0.5) > 0.05 and count >= 100:
        log.warning(f"{split}: label balance {cycles}/{count} is outside 50% +/- 5%")

    augmentation = augment.to_dict()
    augmentation["acceptance_rate"] = acceptance
    manifest = {
        "kind": "augmented",
        "seed": int(seed),
        "system": SystemName.SO.value,
        "param_names": list(param_names(SystemName.SO)),
        "count": int(count),
        "split": split,
        "noise_sigma": float(sigma),
        "noise_convention": NOISE_CONVENTION,
        "grid": [size, size],
        "extent": [list(grid.extent[0]), list(grid.extent[1])],
        "augmentation": augmentation,
    }
    return Dataset(samples, manifest)


def make_augmented_dataset(n_train: int, n_test: int, seed: int, sigma: float = 0.0,
                           augment: Optional[AugmentConfig] = None, size: int = 64,
                           keep_raw: bool = True, threads: int = 1) -> Tuple[Dataset, Dataset]:
    """
    Build the Augmented SO train and test sets.

    Every sample draws its SO parameters, diffeos and noise from its own
    generator derived from (seed, split, index), so the result does not
    depend on the thread count.

    Returns:
        (train, test) datasets
    """
    if n_train < 1 or n_test < 1:
        raise ConfigError(f"Dataset sizes must be >= 1, got n_train={n_train}, n_test={n_test}")
    augment = augment or AugmentConfig()
    log.info(f"Generating Augmented SO: {n_train} train / {n_test} test "
             f"(B={augment.bound}, K={augment.bins}, sigma={sigma}, seed={seed})")
    train = make_augmented_split(n_train, "train", seed, sigma, augment, size, keep_raw, threads)
    test = make_augmented_split(n_test, "test", seed, sigma, augment, size, keep_raw, threads)
    log.info(f"Augmented SO ready: acceptance {train.manifest['augmentation']['acceptance_rate']:.3f}")
    return train, test
