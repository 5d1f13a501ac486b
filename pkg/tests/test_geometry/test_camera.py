"""
Tests for the collinearity camera model and DSM intersection.
"""

import math

import numpy as np
import pytest
from src.aerial_lidar_reg.exceptions import DsmIntersectionError, GeometryError, ProjectionError
from src.aerial_lidar_reg.geometry.camera import (
    CameraIntrinsics,
    CameraPose,
    angles_from_rotation,
    image_to_ground,
    image_to_ground_at_height,
    intersect_dsm_many,
    project_ground_to_image,
    project_points,
    rotation_from_angles,
)
from src.aerial_lidar_reg.raster.grid import GeoRaster, GeoTransform, RasterGrid


def _flat_dsm(half_extent, height):
    """Constant DSM with 1 m cells centered on integer coordinates around the origin."""
    size = 2 * half_extent + 1
    transform = GeoTransform(-half_extent - 0.5, half_extent + 0.5, 1.0, -1.0)
    return GeoRaster(RasterGrid(np.full((size, size), float(height))), transform)


class TestRotation:
    """Test cases for rotation matrices."""

    def test_zero_angles_identity(self):
        """Test zero angles give the identity."""
        assert np.allclose(rotation_from_angles(0.0, 0.0, 0.0).matrix, np.eye(3))

    def test_orthonormal(self):
        """Test rotations are orthonormal with determinant 1."""
        R = rotation_from_angles(0.3, -0.2, 1.1).matrix
        assert np.allclose(R @ R.T, np.eye(3))
        assert np.linalg.det(R) == pytest.approx(1.0)

    def test_angles_round_trip(self):
        """Test angles_from_rotation inverts rotation_from_angles."""
        angles = (0.05, -0.12, 2.0)
        recovered = angles_from_rotation(rotation_from_angles(*angles))
        assert np.allclose(recovered, angles)

    def test_named_elements(self):
        """Test element names follow row-major a, b, c rows."""
        rotation = rotation_from_angles(0.1, 0.2, 0.3)
        assert rotation.b3 == rotation.matrix[1, 2]
        assert rotation.c1 == rotation.matrix[2, 0]


class TestCameraTypes:
    """Test cases for pose and intrinsics validation."""

    def test_pose_vector_round_trip(self):
        """Test as_vector and from_vector are inverse."""
        pose = CameraPose(1.0, 2.0, 3.0, 0.1, 0.2, 0.3)
        assert CameraPose.from_vector(pose.as_vector()) == pose

    def test_pose_rejects_non_finite(self):
        """Test NaN pose elements."""
        with pytest.raises(GeometryError):
            CameraPose(math.nan, 0.0, 0.0, 0.0, 0.0, 0.0)

    def test_intrinsics_principal_point_inside(self):
        """Test the principal point must lie in the image."""
        with pytest.raises(GeometryError):
            CameraIntrinsics(0.1, 1e-4, 150.0, 50.0, 101, 101)

    def test_intrinsics_positive_focal_length(self):
        """Test the focal length must be positive."""
        with pytest.raises(GeometryError):
            CameraIntrinsics(0.0, 1e-4, 50.0, 50.0, 101, 101)


class TestProjection:
    """Test cases for ground to image projection."""

    def setup_method(self):
        """Set up test fixtures."""
        self.pose = CameraPose(0.0, 0.0, 1000.0, 0.0, 0.0, 0.0)
        # 1 m ground sample distance on Z = 0.
        self.intr = CameraIntrinsics(0.1, 1e-4, 50.0, 50.0, 101, 101)

    def test_nadir_projection(self):
        """Test east maps to columns and north to decreasing rows."""
        projection = project_ground_to_image(self.pose, self.intr, 10.0, 20.0, 0.0)
        assert projection.col == pytest.approx(60.0)
        assert projection.row == pytest.approx(30.0)
        assert projection.x == pytest.approx(0.001)
        assert projection.y == pytest.approx(0.002)

    def test_behind_camera(self):
        """Test points above the projection center are rejected."""
        with pytest.raises(ProjectionError):
            project_ground_to_image(self.pose, self.intr, 0.0, 0.0, 2000.0)

    def test_vectorised_projection(self):
        """Test project_points agrees with the scalar projection."""
        X = np.array([10.0, -5.0, 0.0])
        Y = np.array([20.0, 3.0, 0.0])
        Z = np.array([0.0, 50.0, 2000.0])
        cols, rows, in_front = project_points(self.pose, self.intr, X, Y, Z)
        assert in_front.tolist() == [True, True, False]
        expected = project_ground_to_image(self.pose, self.intr, -5.0, 3.0, 50.0)
        assert cols[1] == pytest.approx(expected.col)
        assert rows[1] == pytest.approx(expected.row)
        assert np.isnan(cols[2])

    def test_height_intersection_inverts_projection(self):
        """Test image_to_ground_at_height on a tilted camera."""
        pose = CameraPose(500.0, -300.0, 1200.0, 0.02, -0.015, 0.4)
        projection = project_ground_to_image(pose, self.intr, 520.0, -290.0, 35.0)
        X, Y = image_to_ground_at_height(pose, self.intr, projection.col, projection.row, 35.0)
        assert X == pytest.approx(520.0, abs=1e-6)
        assert Y == pytest.approx(-290.0, abs=1e-6)


class TestDsmIntersection:
    """Test cases for ray/DSM intersection."""

    def setup_method(self):
        """Set up test fixtures."""
        self.pose = CameraPose(0.0, 0.0, 1000.0, 0.0, 0.0, 0.0)
        self.intr = CameraIntrinsics(0.1, 1e-4, 50.0, 50.0, 101, 101)

    def test_flat_dsm(self):
        """Test the ray lands on the DSM height with perspective scaling."""
        X, Y, Z = image_to_ground(self.pose, self.intr, 60.0, 30.0, _flat_dsm(100, 50.0))
        assert Z == pytest.approx(50.0)
        assert X == pytest.approx(9.5)
        assert Y == pytest.approx(19.0)

    def test_sloped_dsm_is_consistent(self):
        """Test the intersection lies on the DSM and projects back to the pixel."""
        size = 201
        transform = GeoTransform(-100.5, 100.5, 1.0, -1.0)
        cols = np.arange(size)
        data = np.tile(20.0 + 0.2 * cols, (size, 1))
        dsm = GeoRaster(RasterGrid(data), transform)
        X, Y, Z = image_to_ground(self.pose, self.intr, 80.0, 40.0, dsm)
        assert Z == pytest.approx(20.0 + 0.2 * (X + 100.0), abs=0.02)
        projection = project_ground_to_image(self.pose, self.intr, X, Y, Z)
        assert projection.col == pytest.approx(80.0, abs=1e-3)
        assert projection.row == pytest.approx(40.0, abs=1e-3)

    def test_ray_leaves_dsm(self):
        """Test a corner ray beyond a small DSM."""
        with pytest.raises(DsmIntersectionError):
            image_to_ground(self.pose, self.intr, 0.0, 0.0, _flat_dsm(10, 0.0))

    def test_nodata_dsm(self):
        """Test a DSM without valid elevations."""
        dsm = GeoRaster(RasterGrid(np.full((5, 5), -9999.0), nodata=-9999.0),
                        GeoTransform(-2.5, 2.5, 1.0, -1.0))
        with pytest.raises(DsmIntersectionError):
            image_to_ground(self.pose, self.intr, 50.0, 50.0, dsm)

    def test_vectorised_intersection(self):
        """Test intersect_dsm_many agrees with the scalar version and flags misses."""
        dsm = _flat_dsm(30, 10.0)
        cols = np.array([50.0, 60.0, 0.0])
        rows = np.array([50.0, 45.0, 0.0])
        X, Y, Z, ok = intersect_dsm_many(self.pose, self.intr, cols, rows, dsm)
        assert ok.tolist() == [True, True, False]
        expected = image_to_ground(self.pose, self.intr, 60.0, 45.0, dsm)
        assert (X[1], Y[1], Z[1]) == pytest.approx(expected)
        assert np.isnan(X[2])
