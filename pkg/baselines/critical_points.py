"""
baselines/critical_points.py

Critical-point topology baseline: locate zeros of a velocity raster cell by
cell, characterize each by its Jacobian eigenvalues and call the system
periodic when any zero repels.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence

import numpy as np

from dynamics.rasterize import bilinear_sampler
from models.field import VectorField
from models.system import DynClass
from utils.logging_utils import get_module_logger

# Get module logger
log = get_module_logger()

NEWTON_ITERATIONS = 20
NEWTON_TOLERANCE = 1e-6
CELL_SLACK = 1e-9
DEDUP_RADIUS = 0.5
DEGENERATE_DET = 1e-10


class CriticalKind(str, Enum):
    ATTRACTING_NODE = "AttractingNode"
    ATTRACTING_FOCUS = "AttractingFocus"
    REPELLING_NODE = "RepellingNode"
    REPELLING_FOCUS = "RepellingFocus"
    SADDLE = "Saddle"
    CENTER = "Center"
    DEGENERATE = "Degenerate"

    @property
    def repelling(self) -> bool:
        return self in (CriticalKind.REPELLING_NODE, CriticalKind.REPELLING_FOCUS)


@dataclass(frozen=True)
class CriticalPoint:
    position: np.ndarray
    jacobian: np.ndarray
    kind: CriticalKind


def kind_from_jacobian(jacobian: np.ndarray) -> CriticalKind:
    """
    Linear-stability type of a 2x2 Jacobian.

    Trace and determinant decide: negative determinant is a saddle, a
    negative discriminant a focus (or a center when the trace vanishes),
    otherwise a node; the trace sign separates attracting from repelling.
    """
    scale = max(float(np.max(np.abs(jacobian))) ** 2, np.finfo(float).tiny)
    trace = float(np.trace(jacobian))
    det = float(np.linalg.det(jacobian))
    if abs(det) < DEGENERATE_DET * scale:
        return CriticalKind.DEGENERATE
    if det < 0:
        return CriticalKind.SADDLE
    discriminant = trace * trace - 4.0 * det
    if abs(trace) < DEGENERATE_DET * np.sqrt(scale):
        return CriticalKind.CENTER if discriminant < 0 else CriticalKind.DEGENERATE
    if discriminant < 0:
        return CriticalKind.ATTRACTING_FOCUS if trace < 0 else CriticalKind.REPELLING_FOCUS
    return CriticalKind.ATTRACTING_NODE if trace < 0 else CriticalKind.REPELLING_NODE


def _sign_change(corners: np.ndarray) -> np.ndarray:
    """True where the four cell corners (stacked on axis 0) do not share a strict sign."""
    return (corners.min(axis=0) <= 0) & (corners.max(axis=0) >= 0)


def _newton_in_cell(u: np.ndarray, v: np.ndarray) -> Optional[np.ndarray]:
    """
    Zero of the bilinear interpolant in one cell.

    Args:
        u, v: 2x2 corner values indexed [row, col]

    Returns:
        (s, t) in cell units (s along columns) or None when Newton fails
        or leaves the cell
    """
    s, t = 0.5, 0.5
    for _ in range(NEWTON_ITERATIONS):
        f = np.empty(2)
        jac = np.empty((2, 2))
        for k, c in enumerate((u, v)):
            f[k] = (c[0, 0] * (1 - s) * (1 - t) + c[0, 1] * s * (1 - t)
                    + c[1, 0] * (1 - s) * t + c[1, 1] * s * t)
            jac[k, 0] = (c[0, 1] - c[0, 0]) * (1 - t) + (c[1, 1] - c[1, 0]) * t
            jac[k, 1] = (c[1, 0] - c[0, 0]) * (1 - s) + (c[1, 1] - c[0, 1]) * s
        if abs(np.linalg.det(jac)) < 1e-300:
            return None
        step = np.linalg.solve(jac, f)
        s -= step[0]
        t -= step[1]
        if np.max(np.abs(step)) < NEWTON_TOLERANCE:
            break
    else:
        return None
    if -CELL_SLACK <= s <= 1 + CELL_SLACK and -CELL_SLACK <= t <= 1 + CELL_SLACK:
        return np.array([s, t])
    return None


def central_jacobian(field: VectorField, position: np.ndarray) -> np.ndarray:
    """Central-difference Jacobian with a one-lattice-spacing step."""
    sampler = bilinear_sampler(field)
    dx, dy = field.grid.spacing
    probes = np.array([position + [dx, 0.0], position - [dx, 0.0],
                       position + [0.0, dy], position - [0.0, dy]])
    values = sampler(probes)
    jac = np.empty((2, 2))
    jac[:, 0] = (values[0] - values[1]) / (2.0 * dx)
    jac[:, 1] = (values[2] - values[3]) / (2.0 * dy)
    return jac


def find_critical_points(field: VectorField) -> List[CriticalPoint]:
    """
    Detect and characterize the zeros of a velocity raster.

    Cells where both components change sign are refined by Newton's method
    on the bilinear interpolant; roots closer than half a cell are merged.

    Args:
        field: Raw velocity raster

    Returns:
        Critical points in row-major cell order (possibly empty)
    """
    u, v = field.u, field.v
    corners_u = np.stack([u[:-1, :-1], u[:-1, 1:], u[1:, :-1], u[1:, 1:]])
    corners_v = np.stack([v[:-1, :-1], v[:-1, 1:], v[1:, :-1], v[1:, 1:]])
    candidates = np.argwhere(_sign_change(corners_u) & _sign_change(corners_v))

    roots: List[np.ndarray] = []
    for row, col in candidates:
        local = _newton_in_cell(u[row:row + 2, col:col + 2], v[row:row + 2, col:col + 2])
        if local is None:
            continue
        cell = np.array([col + local[0], row + local[1]])
        if any(np.max(np.abs(cell - other)) < DEDUP_RADIUS for other in roots):
            continue
        roots.append(cell)

    (x0, _), (y0, _) = field.grid.extent
    dx, dy = field.grid.spacing
    points = []
    for cell in roots:
        position = np.array([x0 + cell[0] * dx, y0 + cell[1] * dy])
        jacobian = central_jacobian(field, position)
        points.append(CriticalPoint(position, jacobian, kind_from_jacobian(jacobian)))
    log.debug(f"{len(candidates)} candidate cells, {len(points)} critical points")
    return points


def classify_critical(field: VectorField) -> DynClass:
    """Cycle when any detected critical point repels, point otherwise."""
    points = find_critical_points(field)
    return DynClass.CYCLE if any(p.kind.repelling for p in points) else DynClass.POINT


def critical_point_stats(fields: Sequence[VectorField], labels: Sequence[int]) -> Dict[str, float]:
    """Mean number of detected critical points per true class."""
    counts: Dict[int, List[int]] = {int(DynClass.POINT): [], int(DynClass.CYCLE): []}
    for field, label in zip(fields, labels):
        counts[int(label)].append(len(find_critical_points(field)))
    stats = {DynClass(label).short: float(np.mean(values)) if values else float("nan")
             for label, values in counts.items()}
    if stats.get("cycle", 0.0) > 1.0:
        log.warning(f"Spurious critical points: {stats['cycle']:.2f} per periodic field on average")
    return stats
