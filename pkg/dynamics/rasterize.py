"""
dynamics/rasterize.py

Lattice evaluation of systems, the relative-RMS noise protocol, the angular
representation and unaugmented per-system datasets.
"""

from typing import Callable, Optional

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from dynamics.systemzoo import (boundary_distance, eval_rhs, make_system, param_names,
                                resolve_name, sample_params, true_label)
from models.dataset import Dataset, LabeledSample
from models.field import AngleField, GridSpec, VectorField
from models.system import DynClass, SystemSpec
from utils.errors import ExtentMismatch
from utils.logging_utils import get_module_logger

# Get module logger
log = get_module_logger()

SPLIT_CODES = {"train": 0, "test": 1, "val": 2, "calibration": 3, "probe": 4}
NOISE_CONVENTION = "relative_rms"
EXTENT_ATOL = 1e-12


def derive_rng(seed: int, *keys: int) -> np.random.Generator:
    """Independent generator for one work item; the stream depends only on (seed, keys)."""
    return np.random.default_rng([int(seed), *(int(k) for k in keys)])


def split_code(split: str) -> int:
    if split not in SPLIT_CODES:
        raise ValueError(f"Unknown split '{split}'; expected one of {sorted(SPLIT_CODES)}")
    return SPLIT_CODES[split]


def default_grid(system: SystemSpec, size: int = 64) -> GridSpec:
    """Square lattice over the system's phase-space window."""
    if system.dim != 2:
        raise ExtentMismatch(f"{system.name.value} is {system.dim}-dimensional; rasters need a planar system")
    return GridSpec(size, size, (tuple(system.extent[0]), tuple(system.extent[1])))


def check_extent(system: SystemSpec, grid: GridSpec) -> None:
    if system.dim != 2 or not np.allclose(np.asarray(grid.extent, dtype=np.float64),
                                          np.asarray(system.extent, dtype=np.float64),
                                          rtol=0.0, atol=EXTENT_ATOL):
        error_msg = f"Grid extent {grid.extent} does not match {system.name.value} extent {system.extent}"
        log.error(error_msg)
        raise ExtentMismatch(error_msg)


def provenance(system: SystemSpec, diffeo_id: str = "identity", sigma: float = 0.0) -> dict:
    return {"system": system.name.value, "params": system.params.tolist(),
            "diffeo": diffeo_id, "noise_sigma": float(sigma)}


def rasterize(system: SystemSpec, grid: GridSpec) -> VectorField:
    """
    Evaluate the system on every lattice point.

    Args:
        system: Planar system specification
        grid: Lattice whose extent equals the system's extent

    Returns:
        VectorField with u, v of shape grid.shape
    """
    check_extent(system, grid)
    velocities = eval_rhs(system, grid.lattice())
    return VectorField(velocities[..., 0], velocities[..., 1], grid, provenance(system))


def add_noise(field: VectorField, sigma: float, rng) -> VectorField:
    """
    Add i.i.d. Gaussian noise scaled by sigma times the field's RMS magnitude.

    Args:
        field: Clean vector field
        sigma: Relative noise level (>= 0)
        rng: numpy Generator or integer seed

    Returns:
        The noisy field; the input itself when sigma is 0
    """
    if sigma < 0:
        raise ValueError(f"Noise sigma must be non-negative, got {sigma}")
    if sigma == 0:
        return field
    rng = np.random.default_rng(rng)
    scale = field.rms()
    if scale == 0:
        log.warning("Adding noise to an all-zero field; relative noise is zero")
    noise = rng.standard_normal((2,) + field.grid.shape) * (sigma * scale)
    meta = dict(field.provenance)
    meta["noise_sigma"] = float(sigma)
    return VectorField(field.u + noise[0], field.v + noise[1], field.grid, meta)


def to_angles(field: VectorField) -> AngleField:
    """Quadrant-correct angle of every vector, in (-pi, pi]; zero vectors map to 0."""
    phi = np.arctan2(field.v, field.u)
    phi[phi == -np.pi] = np.pi
    phi[(field.u == 0) & (field.v == 0)] = 0.0
    return AngleField(phi, field.grid, dict(field.provenance))


def field_from_raw(raw: np.ndarray, grid: GridSpec) -> VectorField:
    """VectorField view of a stored (2, H, W) raster."""
    raw = np.asarray(raw, dtype=np.float64)
    return VectorField(raw[0], raw[1], grid)


def make_sample(field: VectorField, label: Optional[DynClass], params, distance: float = 0.0,
                keep_raw: bool = True) -> LabeledSample:
    """Package a (possibly noisy) field as a dataset sample."""
    angles = to_angles(field).phi
    raw = field.stacked() if keep_raw else None
    return LabeledSample(angles, label, params, distance, raw)


def grid_from_manifest(manifest: dict) -> GridSpec:
    height, width = manifest["grid"]
    (x0, x1), (y0, y1) = manifest["extent"]
    return GridSpec(width, height, ((x0, x1), (y0, y1)))


def make_zoo_dataset(name, count: int, seed: int, sigma: float = 0.0, size: int = 64,
                     keep_raw: bool = True, split: str = "test") -> Dataset:
    """
    Unaugmented labeled rasters of one zoo system.

    Args:
        name: System identifier (one of the closed-form systems)
        count: Number of samples
        seed: Base seed; content is a pure function of (seed, system, split)
        sigma: Relative noise level applied to the raw rasters
        size: Lattice size
        keep_raw: Store the noisy (u, v) rasters alongside the angles
        split: Split tag recorded in the manifest and mixed into seeds

    Returns:
        Dataset with manifest describing its generation
    """
    key = resolve_name(name)
    code = split_code(split)
    system_code = list(type(key)).index(key)
    log.info(f"Generating {count} {key.value} samples (split={split}, sigma={sigma}, seed={seed})")

    params = sample_params(key, count, derive_rng(seed, code, system_code))
    samples = []
    grid = None
    for index, theta in enumerate(params):
        system = make_system(key, theta)
        grid = grid or default_grid(system, size)
        field = rasterize(system, grid)
        field = add_noise(field, sigma, derive_rng(seed, code, system_code, index))
        samples.append(make_sample(field, true_label(system), theta, boundary_distance(system), keep_raw))

    labels = np.array([int(s.label) for s in samples])
    log.debug(f"{key.value}: {labels.sum()} cycle / {count - labels.sum()} point samples")

    manifest = {
        "kind": "zoo",
        "seed": int(seed),
        "system": key.value,
        "param_names": list(param_names(key)),
        "count": int(count),
        "split": split,
        "noise_sigma": float(sigma),
        "noise_convention": NOISE_CONVENTION,
        "grid": [size, size],
        "extent": [list(grid.extent[0]), list(grid.extent[1])],
        "augmentation": None,
    }
    return Dataset(samples, manifest)


def renoise_dataset(dataset: Dataset, sigma: float, seed: int) -> Dataset:
    """
    Re-derive a dataset from its stored rasters with fresh noise.

    Sample i draws from derive_rng(seed, i), so a fixed clean set can be swept
    across noise levels reproducibly.
    """
    if not dataset.has_raw:
        raise ValueError("Re-noising needs the raw-vector section")
    grid = grid_from_manifest(dataset.manifest)
    samples = []
    for index, sample in enumerate(dataset):
        field = add_noise(field_from_raw(sample.raw, grid), sigma, derive_rng(seed, index))
        samples.append(make_sample(field, sample.label, sample.params, sample.distance, True))
    manifest = dict(dataset.manifest)
    manifest["noise_sigma"] = float(sigma)
    manifest["noise_seed"] = int(seed)
    return Dataset(samples, manifest)


def bilinear_sampler(field: VectorField) -> Callable[[np.ndarray], np.ndarray]:
    """
    Clamped bilinear velocity lookup over the field's lattice.

    Returns:
        Function mapping points (..., 2) in (x, y) order to velocities (..., 2)
    """
    grid = field.grid
    values = np.stack([field.u, field.v], axis=-1)
    interp = RegularGridInterpolator((grid.ys, grid.xs), values, method="linear",
                                     bounds_error=False, fill_value=None)
    (x0, x1), (y0, y1) = grid.extent

    def sample(points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=np.float64)
        query = np.stack([np.clip(points[..., 1], y0, y1), np.clip(points[..., 0], x0, x1)], axis=-1)
        return interp(query)

    return sample
