"""
dynamics/odeint.py

Fixed-step RK4 integration, finite-difference velocity estimates and
inverse-distance-weighted interpolation of scattered velocities onto a
lattice. This is how trajectory and cell-like data become raster inputs.
"""

from typing import Callable, Sequence, Tuple

import numpy as np
from scipy.spatial.distance import cdist

from dynamics.systemzoo import REPRESSILATOR_X0, TETR_LACI_DIMS, eval_rhs, make_system
from models.field import GridSpec, ScatteredVelocities, Trajectory, VectorField
from models.system import SystemName
from utils.errors import NonFiniteState, TooShort
from utils.logging_utils import get_module_logger

# Get module logger
log = get_module_logger()

DIVERGENCE_LIMIT = 1e9
QUERY_CHUNK = 4096

Rhs = Callable[[np.ndarray], np.ndarray]


def integrate(rhs: Rhs, x0, dt: float, T: float) -> Trajectory:
    """
    Classic fourth-order Runge-Kutta with a fixed step.

    `x0` may be one state (dim,) or a batch (batch, dim); `rhs` must accept
    the same shape.

    Args:
        rhs: Vector field, x -> dx/dt
        x0: Initial state(s)
        dt: Step size (> 0)
        T: Horizon (>= dt); floor(T/dt) steps are taken

    Returns:
        Trajectory with floor(T/dt) + 1 states

    Raises:
        NonFiniteState: a state became non-finite or exceeded the divergence
            limit; `partial` holds the trajectory up to the last good state
    """
    if dt <= 0 or T < dt:
        raise ValueError(f"Integration needs dt > 0 and T >= dt, got dt={dt}, T={T}")
    steps = int(np.floor(T / dt + 1e-9))
    state = np.array(x0, dtype=np.float64)
    states = np.empty((steps + 1,) + state.shape)
    states[0] = state
    half = 0.5 * dt

    for n in range(steps):
        k1 = rhs(state)
        k2 = rhs(state + half * k1)
        k3 = rhs(state + half * k2)
        k4 = rhs(state + dt * k3)
        state = state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(state)) or np.max(np.abs(state)) > DIVERGENCE_LIMIT:
            partial = Trajectory(np.arange(n + 1) * dt, states[:n + 1].copy())
            error_msg = f"Integration diverged at t={(n + 1) * dt:.4g} after {n + 1} steps"
            log.error(error_msg)
            raise NonFiniteState(error_msg, partial)
        states[n + 1] = state

    return Trajectory(np.arange(steps + 1) * dt, states)


def estimate_velocities(trajectory: Trajectory, dims: Sequence[int] = (0, 1)) -> ScatteredVelocities:
    """
    Forward-difference velocities projected onto two state dimensions.

    Positions are the projected states; the last state has no successor and is dropped.
    """
    if len(trajectory) < 2:
        error_msg = f"Velocity estimation needs at least 2 states, got {len(trajectory)}"
        log.error(error_msg)
        raise TooShort(error_msg)
    dims = list(dims)
    states = np.asarray(trajectory.states, dtype=np.float64)
    velocities = (states[1:] - states[:-1]) / trajectory.dt
    return ScatteredVelocities(states[:-1][:, dims], velocities[:, dims],
                               {"method": "forward_difference", "dims": dims})


def _canonical_order(points: np.ndarray, velocities: np.ndarray) -> np.ndarray:
    return np.lexsort((velocities[:, 1], velocities[:, 0], points[:, 1], points[:, 0]))


def interpolate_scattered(scattered: ScatteredVelocities, grid: GridSpec, k: int = 8,
                          power: float = 2.0) -> VectorField:
    """
    Inverse-distance weighting over the k nearest samples.

    Samples are first put in a canonical order, and neighbors are ranked by
    distance with a stable sort, so the output does not depend on the order
    the samples were given in. A lattice point that coincides with samples
    takes the mean of those samples.

    Args:
        scattered: Samples to interpolate (at least one)
        grid: Output lattice
        k: Number of neighbors
        power: Distance exponent

    Returns:
        VectorField on `grid`
    """
    if len(scattered) < 1:
        raise TooShort("Interpolation needs at least one sample")
    order = _canonical_order(scattered.points, scattered.velocities)
    points = scattered.points[order]
    values = scattered.velocities[order]
    queries = grid.lattice().reshape(-1, 2)
    k_eff = min(int(k), len(points))

    result = np.empty((len(queries), 2))
    for start in range(0, len(queries), QUERY_CHUNK):
        block = queries[start:start + QUERY_CHUNK]
        distances = cdist(block, points)
        nearest = np.argsort(distances, axis=1, kind="stable")[:, :k_eff]
        near_d = np.take_along_axis(distances, nearest, axis=1)
        near_v = values[nearest]

        hits = distances == 0.0
        hit_rows = hits.any(axis=1)
        with np.errstate(divide="ignore"):
            weights = np.where(near_d > 0, 1.0 / near_d ** power, 0.0)
        weights[hit_rows] = 0.0
        total = weights.sum(axis=1, keepdims=True)
        total[hit_rows] = 1.0
        out = np.einsum("qk,qkc->qc", weights, near_v) / total

        if np.any(hit_rows):
            counts = hits[hit_rows].sum(axis=1, keepdims=True)
            out[hit_rows] = (hits[hit_rows].astype(np.float64) @ values) / counts
        result[start:start + len(block)] = out

    field = result.reshape(grid.shape + (2,))
    meta = dict(scattered.provenance)
    meta.update({"interpolation": "idw", "k": k_eff, "power": float(power), "samples": len(points)})
    return VectorField(field[..., 0], field[..., 1], grid, meta)


def scattered_to_field(scattered: ScatteredVelocities, size: int = 64, k: int = 8,
                       power: float = 2.0, margin: float = 0.05) -> VectorField:
    """Interpolate scattered samples onto a square lattice over their padded bounding box."""
    return interpolate_scattered(scattered, scattered.bounding_grid(size, margin), k, power)


def simulate_repressilator_sample(alpha: float, beta: float, n_cells: int = 100, sigma: float = 0.5,
                                  seed: int = 0, horizon: float = 50.0, dt: float = 0.1,
                                  dims: Tuple[int, int] = TETR_LACI_DIMS) -> ScatteredVelocities:
    """
    Cell-like velocity samples from one repressilator trajectory.

    Integrates from the fixed initial state, draws `n_cells` states uniformly
    along the trajectory, perturbs all six coordinates with N(0, sigma^2) and
    evaluates the model velocities at the perturbed states.

    Returns:
        Positions and velocities projected on the (p_TetR, p_LacI) plane
    """
    system = make_system(SystemName.REPRESSILATOR, (alpha, beta))
    trajectory = integrate(lambda x: eval_rhs(system, x), REPRESSILATOR_X0, dt, horizon)

    rng = np.random.default_rng(seed)
    picks = np.sort(rng.integers(0, len(trajectory), size=n_cells))
    states = trajectory.states[picks]
    if sigma > 0:
        states = states + rng.normal(0.0, sigma, size=states.shape)
    velocities = eval_rhs(system, states)

    dims = list(dims)
    log.debug(f"Simulated repressilator alpha={alpha:.3g} beta={beta:.3g}: {n_cells} cells")
    return ScatteredVelocities(states[:, dims], velocities[:, dims],
                               {"system": system.name.value, "params": [float(alpha), float(beta)],
                                "noise_sigma": float(sigma), "horizon": float(horizon), "dt": float(dt)})
