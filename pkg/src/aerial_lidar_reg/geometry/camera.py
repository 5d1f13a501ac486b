"""
Photogrammetric camera model.

Rotation order is phi-omega-kappa, R = R_Y(phi) . R_X(omega) . R_Z(kappa),
with R = [[a1, a2, a3], [b1, b2, b3], [c1, c2, c3]]. The image plane has x to
the right and y up; pixel rows grow downwards. The conversion between the
two lives only in CameraIntrinsics.
"""

import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..exceptions import DsmIntersectionError, GeometryError, ProjectionError
from ..raster.grid import GeoRaster, sample_bilinear_many

logger = logging.getLogger(__name__)

DSM_TOLERANCE = 0.01
DSM_MAX_ITERATIONS = 50


@dataclass(frozen=True)
class CameraPose:
    """Exterior orientation: projection center in meters, angles in radians."""
    X_S: float
    Y_S: float
    Z_S: float
    phi: float
    omega: float
    kappa: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in self.as_vector()):
            raise GeometryError(f"Camera pose has non-finite elements: {self}")

    def as_vector(self) -> np.ndarray:
        return np.array([self.X_S, self.Y_S, self.Z_S, self.phi, self.omega, self.kappa])

    @classmethod
    def from_vector(cls, vector) -> "CameraPose":
        return cls(*(float(v) for v in vector))

    @property
    def center(self) -> np.ndarray:
        return np.array([self.X_S, self.Y_S, self.Z_S])


@dataclass(frozen=True)
class CameraIntrinsics:
    """Interior orientation of a distortion-free frame camera."""
    f: float
    pixel_size: float
    principal_col: float
    principal_row: float
    image_width: int
    image_height: int

    def __post_init__(self):
        if not self.f > 0:
            raise GeometryError(f"Focal length must be > 0, got {self.f}")
        if not self.pixel_size > 0:
            raise GeometryError(f"Pixel size must be > 0, got {self.pixel_size}")
        if self.image_width < 1 or self.image_height < 1:
            raise GeometryError(
                f"Image size must be positive, got {self.image_width}x{self.image_height}"
            )
        if not (0 <= self.principal_col <= self.image_width - 1
                and 0 <= self.principal_row <= self.image_height - 1):
            raise GeometryError(
                f"Principal point ({self.principal_col}, {self.principal_row}) is outside the image"
            )

    def pixel_to_plane(self, col, row):
        """Pixel coordinates to image-plane meters."""
        x = (np.asarray(col, dtype=np.float64) - self.principal_col) * self.pixel_size
        y = (self.principal_row - np.asarray(row, dtype=np.float64)) * self.pixel_size
        return x, y

    def plane_to_pixel(self, x, y):
        """Image-plane meters to pixel coordinates."""
        col = self.principal_col + np.asarray(x, dtype=np.float64) / self.pixel_size
        row = self.principal_row - np.asarray(y, dtype=np.float64) / self.pixel_size
        return col, row


@dataclass(frozen=True, eq=False)
class RotationMatrix:
    """Orthonormal 3x3 rotation with photogrammetric element names."""
    matrix: np.ndarray

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=np.float64)
        if matrix.shape != (3, 3):
            raise GeometryError(f"Rotation matrix must be 3x3, got {matrix.shape}")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    a1 = property(lambda self: float(self.matrix[0, 0]))
    a2 = property(lambda self: float(self.matrix[0, 1]))
    a3 = property(lambda self: float(self.matrix[0, 2]))
    b1 = property(lambda self: float(self.matrix[1, 0]))
    b2 = property(lambda self: float(self.matrix[1, 1]))
    b3 = property(lambda self: float(self.matrix[1, 2]))
    c1 = property(lambda self: float(self.matrix[2, 0]))
    c2 = property(lambda self: float(self.matrix[2, 1]))
    c3 = property(lambda self: float(self.matrix[2, 2]))


@dataclass(frozen=True)
class ImageProjection:
    """Image-plane (meters) and pixel coordinates of a projected ground point."""
    x: float
    y: float
    col: float
    row: float


def rotation_from_angles(phi: float, omega: float, kappa: float) -> RotationMatrix:
    """R = R_Y(phi) . R_X(omega) . R_Z(kappa)."""
    cp, sp = math.cos(phi), math.sin(phi)
    co, so = math.cos(omega), math.sin(omega)
    ck, sk = math.cos(kappa), math.sin(kappa)
    r_phi = np.array([[cp, 0.0, -sp], [0.0, 1.0, 0.0], [sp, 0.0, cp]])
    r_omega = np.array([[1.0, 0.0, 0.0], [0.0, co, -so], [0.0, so, co]])
    r_kappa = np.array([[ck, -sk, 0.0], [sk, ck, 0.0], [0.0, 0.0, 1.0]])
    return RotationMatrix(r_phi @ r_omega @ r_kappa)


def angles_from_rotation(rotation: RotationMatrix) -> Tuple[float, float, float]:
    """Inverse of rotation_from_angles for |omega| < pi/2."""
    phi = math.atan2(-rotation.a3, rotation.c3)
    omega = math.asin(max(-1.0, min(1.0, -rotation.b3)))
    kappa = math.atan2(rotation.b1, rotation.b2)
    return phi, omega, kappa


def project_points(pose: CameraPose, intr: CameraIntrinsics, X, Y, Z):
    """
    Vectorised collinearity projection.

    Returns:
        Tuple of (cols, rows, in_front); points on or behind the projection
        plane get NaN coordinates and in_front False
    """
    R = rotation_from_angles(pose.phi, pose.omega, pose.kappa).matrix
    dX = np.asarray(X, dtype=np.float64) - pose.X_S
    dY = np.asarray(Y, dtype=np.float64) - pose.Y_S
    dZ = np.asarray(Z, dtype=np.float64) - pose.Z_S
    # Numerators and denominator of the collinearity equation are R^T . delta.
    u = R[0, 0] * dX + R[1, 0] * dY + R[2, 0] * dZ
    v = R[0, 1] * dX + R[1, 1] * dY + R[2, 1] * dZ
    w = R[0, 2] * dX + R[1, 2] * dY + R[2, 2] * dZ
    in_front = w < 0
    safe_w = np.where(in_front, w, -1.0)
    x = np.where(in_front, -intr.f * u / safe_w, np.nan)
    y = np.where(in_front, -intr.f * v / safe_w, np.nan)
    cols, rows = intr.plane_to_pixel(x, y)
    return cols, rows, in_front


def project_ground_to_image(pose: CameraPose, intr: CameraIntrinsics,
                            X: float, Y: float, Z: float) -> ImageProjection:
    """
    Project a ground point with the collinearity equation.

    Raises:
        ProjectionError: If the point is on or behind the projection plane
    """
    R = rotation_from_angles(pose.phi, pose.omega, pose.kappa).matrix
    u, v, w = R.T @ (np.array([X, Y, Z], dtype=np.float64) - pose.center)
    if not w < 0:
        raise ProjectionError(
            f"Ground point ({X}, {Y}, {Z}) is on or behind the projection plane"
        )
    x = -intr.f * u / w
    y = -intr.f * v / w
    col, row = intr.plane_to_pixel(x, y)
    return ImageProjection(float(x), float(y), float(col), float(row))


def ray_direction(pose: CameraPose, intr: CameraIntrinsics, col, row) -> np.ndarray:
    """Ground-frame direction of pixel rays, shape (3, ...)."""
    R = rotation_from_angles(pose.phi, pose.omega, pose.kappa).matrix
    x, y = intr.pixel_to_plane(col, row)
    x, y = np.broadcast_arrays(x, y)
    camera = np.stack([x, y, np.full(x.shape, -intr.f)])
    return np.tensordot(R, camera, axes=1)


def image_to_ground_at_height(pose: CameraPose, intr: CameraIntrinsics,
                              col: float, row: float, Z: float) -> Tuple[float, float]:
    """
    Intersect a pixel ray with the horizontal plane at height Z.

    Raises:
        DsmIntersectionError: If the ray does not descend
    """
    d = ray_direction(pose, intr, col, row)
    if not d[2] < 0:
        raise DsmIntersectionError(f"Ray of pixel ({col}, {row}) does not point downwards")
    scale = (Z - pose.Z_S) / d[2]
    return float(pose.X_S + scale * d[0]), float(pose.Y_S + scale * d[1])


def _dsm_start_height(dsm: GeoRaster) -> float:
    valid = dsm.grid.valid_mask()
    if not valid.any():
        raise DsmIntersectionError("DSM holds no valid elevations")
    return float(dsm.data[valid].mean())


def image_to_ground(pose: CameraPose, intr: CameraIntrinsics, col: float, row: float,
                    dsm: GeoRaster, tolerance: float = DSM_TOLERANCE,
                    max_iterations: int = DSM_MAX_ITERATIONS) -> Tuple[float, float, float]:
    """
    Ground point seen by a pixel, by fixed-point iteration on the DSM.

    Starting at the mean DSM height, the ray is cut at the current Z, the
    DSM is resampled under the cut, and the loop stops once Z moves less
    than the tolerance.

    Returns:
        (X, Y, Z) in meters

    Raises:
        DsmIntersectionError: If the ray leaves the DSM, lands on nodata or
            does not converge
    """
    z = _dsm_start_height(dsm)
    for _ in range(max_iterations):
        x, y = image_to_ground_at_height(pose, intr, col, row, z)
        values, valid = sample_bilinear_many(dsm, np.array([x]), np.array([y]))
        if not valid[0]:
            c, r = dsm.transform.world_to_pixel(x, y)
            if not (0 <= c <= dsm.width - 1 and 0 <= r <= dsm.height - 1):
                raise DsmIntersectionError(
                    f"Ray of pixel ({col}, {row}) leaves the DSM extent at ({x:.3f}, {y:.3f})"
                )
            raise DsmIntersectionError(f"DSM has no elevation at ({x:.3f}, {y:.3f})")
        z_new = float(values[0])
        if abs(z_new - z) < tolerance:
            x, y = image_to_ground_at_height(pose, intr, col, row, z_new)
            return x, y, z_new
        z = z_new
    raise DsmIntersectionError(
        f"DSM intersection for pixel ({col}, {row}) did not converge in {max_iterations} iterations"
    )


def intersect_dsm_many(pose: CameraPose, intr: CameraIntrinsics, cols, rows, dsm: GeoRaster,
                       tolerance: float = DSM_TOLERANCE,
                       max_iterations: int = DSM_MAX_ITERATIONS):
    """
    Vectorised image_to_ground.

    Returns:
        Tuple of (X, Y, Z, ok); failed rays carry NaN and ok False
    """
    d = ray_direction(pose, intr, cols, rows)
    shape = d.shape[1:]
    descending = d[2] < 0
    safe_dz = np.where(descending, d[2], -1.0)
    z = np.full(shape, _dsm_start_height(dsm))
    active = descending.copy()
    done = np.zeros(shape, dtype=bool)
    x = np.full(shape, np.nan)
    y = np.full(shape, np.nan)

    for _ in range(max_iterations):
        if not active.any():
            break
        scale = (z - pose.Z_S) / safe_dz
        x = pose.X_S + scale * d[0]
        y = pose.Y_S + scale * d[1]
        z_new, valid = sample_bilinear_many(dsm, x, y)
        active &= valid
        converged = active & (np.abs(z_new - z) < tolerance)
        done |= converged
        z = np.where(active, z_new, z)
        active &= ~converged

    scale = (z - pose.Z_S) / safe_dz
    x = np.where(done, pose.X_S + scale * d[0], np.nan)
    y = np.where(done, pose.Y_S + scale * d[1], np.nan)
    z = np.where(done, z, np.nan)
    return x, y, z, done
