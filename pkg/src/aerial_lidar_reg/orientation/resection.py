"""
Space resection on the collinearity equation and iterative mismatch removal.
"""

import dataclasses
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import (
    DivergenceError,
    InsufficientPointsError,
    OrientationError,
    ProjectionError,
    SingularGeometryError,
)
from ..geometry.camera import CameraIntrinsics, CameraPose, project_points

logger = logging.getLogger(__name__)

MIN_POINTS = 4
MAX_ITERATIONS = 50
UPDATE_TOLERANCE = 1e-8
DIVERGENCE_PATIENCE = 5
# RMSE changes below this fraction (or absolute pixels under 1) count as flat.
RMSE_NOISE = 1e-9
# Central-difference steps: meters for the center, radians for the angles.
JACOBIAN_STEPS = np.array([0.01, 0.01, 0.01, 1e-6, 1e-6, 1e-6])
SINGULAR_RCOND = 1e-7
DEFAULT_RMSE_TARGET = 2.0
DEFAULT_MAX_ROUNDS = 10

POSE_ELEMENTS = ("X_S", "Y_S", "Z_S", "phi", "omega", "kappa")


@dataclass(frozen=True)
class ControlPoint:
    """Aerial pixel paired with its ground coordinates."""
    aerial_col: float
    aerial_row: float
    ground_X: float
    ground_Y: float
    ground_Z: float
    residual: Optional[float] = None
    inlier: bool = True
    index: int = -1

    def __post_init__(self):
        values = (self.aerial_col, self.aerial_row, self.ground_X, self.ground_Y, self.ground_Z)
        if not all(math.isfinite(v) for v in values):
            raise OrientationError(f"Control point has non-finite coordinates: {values}")
        if self.residual is not None and not self.residual >= 0:
            raise OrientationError(f"Residual must be >= 0, got {self.residual}")


@dataclass(frozen=True)
class RejectionSummary:
    """History of a mismatch-removal run."""
    rounds: int
    removed: Tuple[int, ...]
    rmse_history: Tuple[float, ...]


@dataclass(frozen=True, eq=False)
class ResectionResult:
    """Refined pose with its fit statistics."""
    pose: CameraPose
    rmse: float
    residuals: np.ndarray
    iterations: int
    converged: bool
    corrections: np.ndarray
    initial: Optional[CameraPose] = None
    rejection: Optional[RejectionSummary] = field(default=None)


def _observations(cps: Sequence[ControlPoint]):
    obs = np.array([[cp.aerial_col, cp.aerial_row] for cp in cps], dtype=np.float64)
    ground = np.array([[cp.ground_X, cp.ground_Y, cp.ground_Z] for cp in cps], dtype=np.float64)
    return obs, ground


def _residual_vector(vector: np.ndarray, intr: CameraIntrinsics,
                     obs: np.ndarray, ground: np.ndarray) -> np.ndarray:
    pose = CameraPose.from_vector(vector)
    cols, rows, in_front = project_points(pose, intr, ground[:, 0], ground[:, 1], ground[:, 2])
    if not np.all(in_front):
        raise ProjectionError(
            f"{int((~in_front).sum())} control points lie behind the camera"
        )
    return np.concatenate([obs[:, 0] - cols, obs[:, 1] - rows])


def _point_residuals(residual_vector: np.ndarray) -> np.ndarray:
    # Per-axis RMS of (d_col, d_row), so the RMSE is sqrt(sum(dx^2 + dy^2) / 2n).
    n = residual_vector.size // 2
    return np.hypot(residual_vector[:n], residual_vector[n:]) / math.sqrt(2.0)


def _rmse(point_residuals: np.ndarray) -> float:
    return float(np.sqrt(np.mean(point_residuals ** 2)))


def compute_residuals(cps: Sequence[ControlPoint], intr: CameraIntrinsics,
                      pose: CameraPose) -> np.ndarray:
    """
    Observed minus projected pixel coordinates.

    Returns:
        (n, 2) array of (d_col, d_row)

    Raises:
        ProjectionError: If a ground point is behind the camera
    """
    if not cps:
        return np.zeros((0, 2))
    obs, ground = _observations(cps)
    vector = _residual_vector(pose.as_vector(), intr, obs, ground)
    n = len(cps)
    return np.column_stack([vector[:n], vector[n:]])


def _jacobian(vector: np.ndarray, intr: CameraIntrinsics,
              obs: np.ndarray, ground: np.ndarray) -> np.ndarray:
    columns = []
    for k, step in enumerate(JACOBIAN_STEPS):
        offset = np.zeros(6)
        offset[k] = step
        forward = _residual_vector(vector + offset, intr, obs, ground)
        backward = _residual_vector(vector - offset, intr, obs, ground)
        columns.append((forward - backward) / (2.0 * step))
    return np.column_stack(columns)


def resect(cps: Sequence[ControlPoint], intr: CameraIntrinsics, initial: CameraPose,
           max_iterations: int = MAX_ITERATIONS,
           tolerance: float = UPDATE_TOLERANCE) -> ResectionResult:
    """
    Least-squares exterior orientation from control points.

    Gauss-Newton over (X_S, Y_S, Z_S, phi, omega, kappa) on the pixel
    residuals of the collinearity equation, with a central-difference
    Jacobian. Iteration stops when the update norm drops below tolerance
    or after max_iterations; running out of iterations is reported through
    ResectionResult.converged, not raised.

    Args:
        cps: Control points, at least four
        intr: Interior orientation
        initial: Starting pose, typically from POS data
        max_iterations: Iteration cap
        tolerance: Update norm threshold in mixed meters/radians

    Returns:
        ResectionResult; residuals are per-point pixel errors scaled to one
        axis, |(d_col, d_row)| / sqrt(2), so rmse is the per-coordinate RMSE

    Raises:
        InsufficientPointsError: With fewer than four points
        SingularGeometryError: If the point layout cannot fix the pose
        DivergenceError: If the RMSE rises for five iterations in a row
    """
    if len(cps) < MIN_POINTS:
        raise InsufficientPointsError(
            f"Resection needs at least {MIN_POINTS} control points, got {len(cps)}"
        )
    obs, ground = _observations(cps)
    vector = initial.as_vector()
    residual = _residual_vector(vector, intr, obs, ground)
    rmse = _rmse(_point_residuals(residual))
    increases = 0
    converged = False
    iterations = 0

    for iterations in range(1, max_iterations + 1):
        jacobian = _jacobian(vector, intr, obs, ground)
        scale = np.linalg.norm(jacobian, axis=0)
        if np.any(scale == 0):
            raise SingularGeometryError("Control points do not constrain every pose element")
        scaled = jacobian / scale
        singular_values = np.linalg.svd(scaled, compute_uv=False)
        if singular_values[-1] < SINGULAR_RCOND * singular_values[0]:
            raise SingularGeometryError(
                "Normal matrix is singular; control points are degenerate (e.g. collinear)"
            )
        step, *_ = np.linalg.lstsq(scaled, -residual, rcond=None)
        update = step / scale
        vector = vector + update

        residual = _residual_vector(vector, intr, obs, ground)
        new_rmse = _rmse(_point_residuals(residual))
        increases = increases + 1 if new_rmse > rmse + RMSE_NOISE * max(rmse, 1.0) else 0
        if increases >= DIVERGENCE_PATIENCE:
            raise DivergenceError(
                f"RMSE increased for {DIVERGENCE_PATIENCE} consecutive iterations "
                f"(now {new_rmse:.3f} px)"
            )
        rmse = new_rmse
        logger.debug("Resection iteration %d: rmse %.6f px, |update| %.3e",
                     iterations, rmse, float(np.linalg.norm(update)))
        if np.linalg.norm(update) < tolerance:
            converged = True
            break

    pose = CameraPose.from_vector(vector)
    point_residuals = _point_residuals(residual)
    if not converged:
        logger.warning("Resection stopped after %d iterations without converging", iterations)
    return ResectionResult(
        pose=pose,
        rmse=_rmse(point_residuals),
        residuals=point_residuals,
        iterations=iterations,
        converged=converged,
        corrections=vector - initial.as_vector(),
        initial=initial,
    )


def reject_outliers(cps: Sequence[ControlPoint], intr: CameraIntrinsics, initial: CameraPose,
                    rmse_target: float = DEFAULT_RMSE_TARGET,
                    max_rounds: int = DEFAULT_MAX_ROUNDS) -> Tuple[List[ControlPoint], ResectionResult]:
    """
    Alternate resection and removal of large-residual control points.

    Each round resects on the current inliers and drops every point whose
    residual exceeds max(3 * RMSE, 3 * rmse_target). The loop ends once the
    RMSE is under rmse_target, nothing was dropped or max_rounds is spent.

    Returns:
        Tuple of (inliers with residuals set, final ResectionResult)

    Raises:
        InsufficientPointsError: If fewer than four inliers would remain
    """
    if rmse_target <= 0:
        raise OrientationError(f"rmse_target must be > 0, got {rmse_target}")
    if max_rounds < 1:
        raise OrientationError(f"max_rounds must be >= 1, got {max_rounds}")
    if len(cps) < MIN_POINTS:
        raise InsufficientPointsError(
            f"Mismatch removal needs at least {MIN_POINTS} control points, got {len(cps)}"
        )

    positions = list(range(len(cps)))
    removed: List[int] = []
    history: List[float] = []
    rounds = 0
    while True:
        rounds += 1
        current = [cps[i] for i in positions]
        result = resect(current, intr, initial)
        history.append(result.rmse)
        logger.info("Rejection round %d: %d points, rmse %.3f px", rounds, len(current), result.rmse)
        if result.rmse < rmse_target or rounds >= max_rounds:
            break
        threshold = max(3.0 * result.rmse, 3.0 * rmse_target)
        keep = result.residuals <= threshold
        if keep.all():
            break
        if keep.sum() < MIN_POINTS:
            raise InsufficientPointsError(
                f"Removing points above {threshold:.2f} px would leave {int(keep.sum())} "
                f"inliers, fewer than {MIN_POINTS}"
            )
        removed.extend(p for p, k in zip(positions, keep) if not k)
        positions = [p for p, k in zip(positions, keep) if k]

    inliers = [
        dataclasses.replace(cps[p], residual=float(r), inlier=True)
        for p, r in zip(positions, result.residuals)
    ]
    summary = RejectionSummary(rounds, tuple(removed), tuple(history))
    return inliers, dataclasses.replace(result, rejection=summary)


def correction_table(result: ResectionResult) -> List[Tuple[str, float, float, float]]:
    """
    Initial / Correction / Final rows per pose element.

    Center elements are in meters, angles in degrees.
    """
    if result.initial is None:
        raise OrientationError("Resection result carries no initial pose")
    initial = result.initial.as_vector()
    final = result.pose.as_vector()
    rows = []
    for k, name in enumerate(POSE_ELEMENTS):
        a, b = initial[k], final[k]
        if k >= 3:
            a, b = math.degrees(a), math.degrees(b)
        rows.append((name, float(a), float(b - a), float(b)))
    return rows
