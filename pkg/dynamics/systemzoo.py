"""
dynamics/systemzoo.py

The parametric planar systems that undergo a Hopf bifurcation, the
subcritical-Hopf probe and the six-dimensional repressilator: right-hand
sides, ground-truth labels, parameter samplers and boundary geometry.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, List, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import brentq
from scipy.special import expit

from models.system import DynClass, Interval, Regime, SystemName, SystemSpec
from utils.errors import (NonFiniteInput, NoOscillationWindow, ParamOutOfRange,
                          UnknownSystem, UnsupportedSystem)
from utils.logging_utils import get_module_logger

# Get module logger
log = get_module_logger()

REPRESSILATOR_ALPHA0 = 0.2
REPRESSILATOR_HILL = 2
# (m_LacI, p_LacI, m_TetR, p_TetR, m_cI, p_cI)
REPRESSILATOR_X0 = (2.11, 2.28, 1.57, 1.71, 1.07, 1.14)
# State indices of the TetR and LacI proteins
TETR_LACI_DIMS = (3, 1)

CURVE_RESOLUTION = 512
RANGE_SLACK = 1e-12

RhsFn = Callable[[np.ndarray, np.ndarray], np.ndarray]
SystemLike = Union[str, SystemName]


def _so(p: np.ndarray, theta: np.ndarray) -> np.ndarray:
    a, omega = theta
    x, y = p[..., 0], p[..., 1]
    radial = a - (x * x + y * y)
    return np.stack([x * radial - omega * y, y * radial + omega * x], axis=-1)


def _suphopf(p: np.ndarray, theta: np.ndarray) -> np.ndarray:
    mu, omega, b = theta
    x, y = p[..., 0], p[..., 1]
    r2 = x * x + y * y
    radial = mu - r2
    angular = omega + b * r2
    return np.stack([x * radial - y * angular, y * radial + x * angular], axis=-1)


def _subhopf(p: np.ndarray, theta: np.ndarray) -> np.ndarray:
    mu, omega, b = theta
    x, y = p[..., 0], p[..., 1]
    r2 = x * x + y * y
    radial = mu + r2 - r2 * r2
    angular = omega + b * r2
    return np.stack([x * radial - y * angular, y * radial + x * angular], axis=-1)


def _lienard_poly(p: np.ndarray, theta: np.ndarray) -> np.ndarray:
    a, c = theta
    x, y = p[..., 0], p[..., 1]
    return np.stack([y, -(a * x + x ** 3) - (c + x * x) * y], axis=-1)


def _lienard_sigmoid(p: np.ndarray, theta: np.ndarray) -> np.ndarray:
    a, b = theta
    x, y = p[..., 0], p[..., 1]
    return np.stack([y, -(expit(a * x) - 0.5) - (b + x * x) * y], axis=-1)


def _vanderpol(p: np.ndarray, theta: np.ndarray) -> np.ndarray:
    (mu,) = theta
    x, y = p[..., 0], p[..., 1]
    return np.stack([y, mu * y - x - x * x * y], axis=-1)


def _bzreaction(p: np.ndarray, theta: np.ndarray) -> np.ndarray:
    a, b = theta
    x, y = p[..., 0], p[..., 1]
    denom = 1.0 + x * x
    return np.stack([a - x - 4.0 * x * y / denom, b * x * (1.0 - y / denom)], axis=-1)


def _selkov(p: np.ndarray, theta: np.ndarray) -> np.ndarray:
    a, b = theta
    x, y = p[..., 0], p[..., 1]
    x2y = x * x * y
    return np.stack([-x + a * y + x2y, b - a * y - x2y], axis=-1)


def _repressilator(p: np.ndarray, theta: np.ndarray) -> np.ndarray:
    alpha, beta = theta
    m = p[..., 0::2]
    prot = p[..., 1::2]
    # LacI is repressed by cI, TetR by LacI, cI by TetR
    repressor = np.roll(prot, 1, axis=-1)
    dm = -m + alpha / (1.0 + repressor ** REPRESSILATOR_HILL) + REPRESSILATOR_ALPHA0
    dp = -beta * (prot - m)
    out = np.empty_like(p, dtype=np.float64)
    out[..., 0::2] = dm
    out[..., 1::2] = dp
    return out


@dataclass(frozen=True)
class _SystemDef:
    param_names: Tuple[str, ...]
    ranges: Tuple[Interval, ...]
    extent: Tuple[Interval, ...]
    rhs: RhsFn
    dim: int = 2
    open_ranges: bool = False


_REGISTRY: Dict[SystemName, _SystemDef] = {
    SystemName.SO: _SystemDef(
        ("a", "omega"), ((-0.5, 0.5), (-1.0, 1.0)), ((-1.0, 1.0), (-1.0, 1.0)), _so),
    SystemName.SUPERCRITICAL_HOPF: _SystemDef(
        ("mu", "omega", "b"), ((-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)), ((-1.0, 1.0), (-1.0, 1.0)), _suphopf),
    SystemName.LIENARD_POLY: _SystemDef(
        ("a", "c"), ((0.0, 1.0), (-1.0, 1.0)), ((-4.2, 4.2), (-4.2, 4.2)), _lienard_poly),
    SystemName.LIENARD_SIGMOID: _SystemDef(
        ("a", "b"), ((0.0, 1.0), (-1.0, 1.0)), ((-1.5, 1.5), (-1.5, 1.5)), _lienard_sigmoid),
    SystemName.VAN_DER_POL: _SystemDef(
        ("mu",), ((-1.0, 1.0),), ((-3.0, 3.0), (-3.0, 3.0)), _vanderpol),
    SystemName.BZ_REACTION: _SystemDef(
        ("a", "b"), ((2.0, 19.0), (2.0, 6.0)), ((0.0, 10.0), (0.0, 20.0)), _bzreaction),
    SystemName.SELKOV: _SystemDef(
        ("a", "b"), ((0.01, 0.11), (0.02, 1.2)), ((0.0, 3.0), (0.0, 3.0)), _selkov),
    SystemName.SUBCRITICAL_HOPF: _SystemDef(
        ("mu", "omega", "b"), ((-0.5, 0.5), (-1.0, 1.0), (-1.0, 1.0)), ((-1.5, 1.5), (-1.5, 1.5)), _subhopf),
    SystemName.REPRESSILATOR: _SystemDef(
        ("alpha", "beta"), ((0.0, 30.0), (0.0, 10.0)), (), _repressilator, dim=6, open_ranges=True),
}

# Systems with a closed-form periodic-attractor condition
TABLE_SYSTEMS = (
    SystemName.SO, SystemName.SUPERCRITICAL_HOPF, SystemName.LIENARD_POLY,
    SystemName.LIENARD_SIGMOID, SystemName.VAN_DER_POL, SystemName.BZ_REACTION, SystemName.SELKOV,
)


def resolve_name(name: SystemLike) -> SystemName:
    """Map a string identifier to a SystemName, raising UnknownSystem otherwise."""
    if isinstance(name, SystemName):
        return name
    try:
        return SystemName(str(name).strip().lower())
    except ValueError:
        error_msg = f"Unknown system '{name}'; expected one of {[s.value for s in SystemName]}"
        log.error(error_msg)
        raise UnknownSystem(error_msg) from None


def param_names(name: SystemLike) -> Tuple[str, ...]:
    return _REGISTRY[resolve_name(name)].param_names


def param_ranges(name: SystemLike) -> Tuple[Interval, ...]:
    return _REGISTRY[resolve_name(name)].ranges


def _extent(key: SystemName, params: np.ndarray) -> Tuple[Interval, ...]:
    if key is SystemName.REPRESSILATOR:
        top = float(params[0]) + REPRESSILATOR_ALPHA0
        return tuple((0.0, top) for _ in range(6))
    return _REGISTRY[key].extent


def make_system(name: SystemLike, params: Sequence[float]) -> SystemSpec:
    """
    Build a validated system specification.

    Args:
        name: System identifier
        params: Parameter vector in the system's declared order

    Returns:
        The SystemSpec with its phase-space extent attached
    """
    key = resolve_name(name)
    spec = _REGISTRY[key]
    theta = np.asarray(params, dtype=np.float64).reshape(-1)

    if theta.size != len(spec.param_names):
        error_msg = (f"{key.value} takes {len(spec.param_names)} parameters "
                     f"{spec.param_names}, got {theta.size}")
        log.error(error_msg)
        raise ParamOutOfRange(error_msg)

    for value, pname, (lo, hi) in zip(theta, spec.param_names, spec.ranges):
        if spec.open_ranges:
            inside = lo < value < hi
        else:
            inside = lo - RANGE_SLACK <= value <= hi + RANGE_SLACK
        if not np.isfinite(value) or not inside:
            bracket = f"({lo}, {hi})" if spec.open_ranges else f"[{lo}, {hi}]"
            error_msg = f"{key.value}: parameter {pname}={value} outside {bracket}"
            log.error(error_msg)
            raise ParamOutOfRange(error_msg, coordinate=pname)

    return SystemSpec(key, theta, _extent(key, theta), spec.dim)


def eval_rhs(system: SystemSpec, point) -> np.ndarray:
    """
    Evaluate the vector field at one point or a stack of points.

    Args:
        system: The system specification
        point: Array of shape (..., system.dim)

    Returns:
        Velocities with the same shape as `point`
    """
    p = np.asarray(point, dtype=np.float64)
    if p.shape[-1] != system.dim:
        raise ValueError(f"{system.name.value} is {system.dim}-dimensional, got points of shape {p.shape}")
    if not np.all(np.isfinite(p)):
        error_msg = f"Non-finite state passed to {system.name.value}"
        log.error(error_msg)
        raise NonFiniteInput(error_msg)
    return _REGISTRY[system.name].rhs(p, system.params)


def _require_table(system_name: SystemName) -> None:
    if system_name not in TABLE_SYSTEMS:
        error_msg = f"{system_name.value} has no closed-form periodic-attractor condition"
        log.error(error_msg)
        raise UnsupportedSystem(error_msg)


def _margin(key: SystemName, theta: np.ndarray) -> np.ndarray:
    """Vectorized margin over parameter rows (..., k)."""
    if key is SystemName.SO:
        return theta[..., 0]
    if key is SystemName.SUPERCRITICAL_HOPF:
        return theta[..., 0]
    if key is SystemName.LIENARD_POLY:
        return -theta[..., 1]
    if key is SystemName.LIENARD_SIGMOID:
        return -theta[..., 1]
    if key is SystemName.VAN_DER_POL:
        return theta[..., 0]
    if key is SystemName.BZ_REACTION:
        a, b = theta[..., 0], theta[..., 1]
        return 3.0 * a / 5.0 - 25.0 / a - b
    if key is SystemName.SELKOV:
        a, b = theta[..., 0], theta[..., 1]
        b2 = b * b
        return -(b2 * b2 + (2.0 * a - 1.0) * b2 + a + a * a)
    raise UnsupportedSystem(f"{key.value} has no closed-form periodic-attractor condition")


def hopf_margin(system: SystemSpec) -> float:
    """Signed condition value: positive iff the system has a periodic attractor."""
    _require_table(system.name)
    return float(_margin(system.name, system.params))


def true_label(system: SystemSpec) -> DynClass:
    """Ground-truth attractor class from the closed-form condition."""
    return DynClass.CYCLE if hopf_margin(system) > 0 else DynClass.POINT


def sample_params(name: SystemLike, count: int, rng) -> np.ndarray:
    """
    Draw i.i.d. uniform parameter vectors over the declared ranges.

    Args:
        name: System identifier
        count: Number of vectors (>= 1)
        rng: numpy Generator or integer seed

    Returns:
        (count, k) array of parameter vectors
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    key = resolve_name(name)
    rng = np.random.default_rng(rng)
    ranges = np.asarray(_REGISTRY[key].ranges, dtype=np.float64)
    lo, hi = ranges[:, 0], ranges[:, 1]
    samples = rng.uniform(lo, hi, size=(count, len(lo)))
    if _REGISTRY[key].open_ranges:
        samples = np.clip(samples, np.nextafter(lo, hi), np.nextafter(hi, lo))
    return samples


def _selkov_branches(resolution: int) -> List[np.ndarray]:
    (a_lo, a_hi), _ = _REGISTRY[SystemName.SELKOV].ranges
    lower, upper = [], []
    for a in np.linspace(a_lo, a_hi, resolution):
        def residual(b, a=a):
            b2 = b * b
            return b2 * b2 + (2.0 * a - 1.0) * b2 + a + a * a
        b_mid = np.sqrt((1.0 - 2.0 * a) / 2.0)
        lower.append((a, brentq(residual, 0.0, b_mid, xtol=1e-15)))
        upper.append((a, brentq(residual, b_mid, 2.0, xtol=1e-15)))
    return [np.array(lower), np.array(upper)]


def _bz_branch(resolution: int) -> np.ndarray:
    (a_lo, a_hi), (b_lo, b_hi) = _REGISTRY[SystemName.BZ_REACTION].ranges
    points = []
    for b in np.linspace(b_lo, b_hi, resolution):
        a = brentq(lambda a, b=b: 3.0 * a / 5.0 - 25.0 / a - b, a_lo, a_hi, xtol=1e-15)
        points.append((a, b))
    return np.array(points)


@lru_cache(maxsize=64)
def _cached_curve(key: SystemName, resolution: int) -> Tuple[np.ndarray, ...]:
    ranges = _REGISTRY[key].ranges
    if key is SystemName.SELKOV:
        branches = _selkov_branches(resolution)
    elif key is SystemName.BZ_REACTION:
        branches = [_bz_branch(resolution)]
    elif key is SystemName.VAN_DER_POL:
        # mu = 0 is a single point of the one-parameter family
        branches = [np.zeros((resolution, 1))]
    else:
        # Boundary is a coordinate hyperplane; sweep the first free axis, others at mid-range
        zero_axis = 0 if key in (SystemName.SO, SystemName.SUPERCRITICAL_HOPF) else 1
        free_axis = 1 if zero_axis == 0 else 0
        points = np.tile([np.mean(r) for r in ranges], (resolution, 1))
        points[:, zero_axis] = 0.0
        points[:, free_axis] = np.linspace(*ranges[free_axis], resolution)
        branches = [points]
    for branch in branches:
        branch.setflags(write=False)
    return tuple(branches)


def boundary_curve(name: SystemLike, resolution: int = CURVE_RESOLUTION) -> List[np.ndarray]:
    """
    Discretize the bifurcation boundary in parameter space.

    Args:
        name: One of the closed-form systems
        resolution: Points per branch (>= 2)

    Returns:
        List of (n, k) polylines in parameter order
    """
    key = resolve_name(name)
    _require_table(key)
    if resolution < 2:
        raise ValueError(f"resolution must be >= 2, got {resolution}")
    return [branch.copy() for branch in _cached_curve(key, resolution)]


def polyline_distance(point: np.ndarray, polyline: np.ndarray) -> float:
    """Euclidean distance from a point to a polyline (segments, not just vertices)."""
    point = np.asarray(point, dtype=np.float64)
    if len(polyline) == 1:
        return float(np.linalg.norm(polyline[0] - point))
    start, end = polyline[:-1], polyline[1:]
    seg = end - start
    length2 = np.einsum("ij,ij->i", seg, seg)
    t = np.einsum("ij,ij->i", point - start, seg) / np.where(length2 > 0, length2, 1.0)
    t = np.clip(t, 0.0, 1.0)
    nearest = start + t[:, None] * seg
    return float(np.min(np.linalg.norm(nearest - point, axis=1)))


def boundary_distance(system: SystemSpec) -> float:
    """
    Signed minimum L2 distance from the parameters to the bifurcation boundary.

    Negative for point attractors, positive for periodic attractors.
    """
    key = system.name
    _require_table(key)
    margin = _margin(key, system.params)
    if key in (SystemName.SO, SystemName.SUPERCRITICAL_HOPF, SystemName.VAN_DER_POL):
        distance = abs(float(system.params[0]))
    elif key in (SystemName.LIENARD_POLY, SystemName.LIENARD_SIGMOID):
        distance = abs(float(system.params[1]))
    else:
        distance = min(polyline_distance(system.params, branch)
                       for branch in _cached_curve(key, CURVE_RESOLUTION))
    return float(np.sign(margin)) * distance


def fixed_point(system: SystemSpec) -> np.ndarray:
    """Analytic fixed point of a planar system."""
    key = system.name
    if key is SystemName.BZ_REACTION:
        x1 = system.param(0) / 5.0
        return np.array([x1, 1.0 + x1 * x1])
    if key is SystemName.SELKOV:
        a, b = system.params
        return np.array([b, b / (a + b * b)])
    if key is SystemName.REPRESSILATOR:
        error_msg = "No analytic planar fixed point registered for the repressilator"
        log.error(error_msg)
        raise UnsupportedSystem(error_msg)
    return np.zeros(2)


def subhopf_regime(system: SystemSpec) -> Regime:
    """Attractor regime of the subcritical Hopf probe."""
    if system.name is not SystemName.SUBCRITICAL_HOPF:
        raise UnsupportedSystem(f"subhopf_regime expects subhopf, got {system.name.value}")
    mu = system.param(0)
    if mu < -0.25:
        return Regime.POINT
    if mu <= 0.0:
        return Regime.BISTABLE
    return Regime.PERIODIC


def repressilator_fixed_point(alpha: float) -> Tuple[float, float]:
    """
    Protein level of the symmetric fixed point and the repression slope there.

    Returns:
        (p_hat, A) with p_hat = alpha / (1 + p_hat^n) + alpha0 and
        A = -alpha n p_hat^(n-1) / (1 + p_hat^n)^2
    """
    if not alpha > 0:
        raise ParamOutOfRange(f"repressilator: alpha={alpha} must be positive", coordinate="alpha")
    n = REPRESSILATOR_HILL
    a0 = REPRESSILATOR_ALPHA0
    p_hat = brentq(lambda p: (p - a0) * (1.0 + p ** n) - alpha, a0, a0 + alpha,
                   xtol=1e-14, rtol=1e-15, maxiter=500)
    slope = -alpha * n * p_hat ** (n - 1) / (1.0 + p_hat ** n) ** 2
    return float(p_hat), float(slope)


def repressilator_boundary(alpha: float) -> Tuple[float, float]:
    """
    Lower and upper beta of the oscillation window at this alpha.

    Raises:
        NoOscillationWindow: when 9A^2 - 24A - 48 < 0
    """
    _, slope = repressilator_fixed_point(alpha)
    disc = 9.0 * slope ** 2 - 24.0 * slope - 48.0
    denom = 4.0 * slope + 8.0
    if disc < 0 or abs(denom) < 1e-12:
        raise NoOscillationWindow(f"No Hopf window at alpha={alpha:.6g} (discriminant {disc:.3g})")
    centre = (3.0 * slope ** 2 - 4.0 * slope - 8.0) / denom
    half = slope * np.sqrt(disc) / denom
    low, high = sorted((float(centre + half), float(centre - half)))
    return low, high


def repressilator_label(alpha: float, beta: float) -> DynClass:
    try:
        beta1, beta2 = repressilator_boundary(alpha)
    except NoOscillationWindow:
        return DynClass.POINT
    return DynClass.CYCLE if beta1 < beta < beta2 else DynClass.POINT


@lru_cache(maxsize=4)
def repressilator_curve(resolution: int = CURVE_RESOLUTION) -> np.ndarray:
    """
    The closed window boundary in the (alpha, beta) plane as one polyline,
    running down the lower branch and back up the upper one.
    """
    alpha_hi = _REGISTRY[SystemName.REPRESSILATOR].ranges[0][1]
    # The window opens where A = -4/3
    alpha_min = brentq(lambda a: repressilator_fixed_point(a)[1] + 4.0 / 3.0, 1e-3, alpha_hi, xtol=1e-13)
    lower, upper = [], []
    for alpha in np.linspace(alpha_min, alpha_hi, resolution):
        _, slope = repressilator_fixed_point(alpha)
        disc = max(9.0 * slope ** 2 - 24.0 * slope - 48.0, 0.0)
        denom = 4.0 * slope + 8.0
        centre = (3.0 * slope ** 2 - 4.0 * slope - 8.0) / denom
        half = slope * np.sqrt(disc) / denom
        beta_lo, beta_hi = sorted((centre + half, centre - half))
        lower.append((alpha, beta_lo))
        upper.append((alpha, beta_hi))
    curve = np.array(lower[::-1] + upper[1:])
    curve.setflags(write=False)
    return curve


def repressilator_distance(alpha: float, beta: float) -> float:
    """Signed distance of (alpha, beta) to the window boundary; positive inside."""
    distance = polyline_distance(np.array([alpha, beta]), repressilator_curve())
    sign = 1.0 if repressilator_label(alpha, beta) is DynClass.CYCLE else -1.0
    return sign * distance
