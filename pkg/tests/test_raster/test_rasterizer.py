"""
Tests for point cloud rasterization.
"""

import numpy as np
import pytest
from src.aerial_lidar_reg.exceptions import RasterError
from src.aerial_lidar_reg.raster.grid import LidarPoint
from src.aerial_lidar_reg.raster.rasterizer import rasterize_points


def _row_cloud(xs, intensity_scale=10.0):
    """Points along y = 0 with intensity proportional to x."""
    xs = np.asarray(xs, dtype=float)
    return np.column_stack([xs, np.zeros_like(xs), np.zeros_like(xs), xs * intensity_scale])


class TestRasterizePoints:
    """Test cases for rasterize_points."""

    def setup_method(self):
        """Set up test fixtures."""
        x, y = np.meshgrid(np.arange(10.0), np.arange(10.0))
        x, y = x.ravel(), y.ravel()
        self.lattice = np.column_stack([x, y, x + y, 10.0 * x])

    def test_lattice_is_hole_free(self):
        """Test a regular 1 m lattice fills a 10x10 grid exactly."""
        raster = rasterize_points(self.lattice, 1.0)
        assert (raster.width, raster.height) == (10, 10)
        assert raster.grid.valid_mask().all()
        assert raster.transform.origin_x == -0.5
        assert raster.transform.origin_y == 9.5

    def test_lattice_intensity_values(self):
        """Test each cell holds the intensity of its point."""
        raster = rasterize_points(self.lattice, 1.0)
        cols = np.arange(10)
        for row in range(10):
            assert np.allclose(raster.data[row], 10.0 * cols)

    def test_lattice_elevation_values(self):
        """Test the elevation attribute; north is row 0."""
        raster = rasterize_points(self.lattice, 1.0, attribute="elevation")
        assert raster.data[0, 0] == 9.0
        assert raster.data[9, 9] == 9.0
        assert raster.data[0, 9] == 18.0

    def test_cell_mean(self):
        """Test points sharing a cell are averaged."""
        points = np.array([[0.0, 0.0, 0.0, 10.0], [0.1, 0.1, 0.0, 20.0], [1.0, 1.0, 0.0, 30.0]])
        raster = rasterize_points(points, 1.0, search_radius=0, nodata=-1.0)
        assert raster.data[1, 0] == pytest.approx(15.0)
        assert raster.data[0, 1] == pytest.approx(30.0)
        assert raster.data[0, 0] == -1.0
        assert raster.data[1, 1] == -1.0

    def test_nearest_fill(self):
        """Test empty cells copy their nearest populated cell."""
        raster = rasterize_points(_row_cloud([0, 1, 4, 5]), 1.0, fill="nearest", search_radius=1)
        assert raster.data[0].tolist() == [0.0, 10.0, 10.0, 40.0, 40.0, 50.0]

    def test_inverse_distance_fill(self):
        """Test inverse-distance filling averages equidistant neighbors."""
        raster = rasterize_points(_row_cloud([0, 1, 3]), 1.0, fill="inverse-distance", search_radius=1)
        assert raster.data[0, 2] == pytest.approx(20.0)

    def test_holes_beyond_radius_stay_nodata(self):
        """Test holes farther than search_radius from data."""
        raster = rasterize_points(_row_cloud([0, 5]), 1.0, search_radius=1, nodata=-1.0)
        assert raster.data[0].tolist() == [0.0, 0.0, -1.0, -1.0, 50.0, 50.0]

    def test_accepts_lidar_points(self):
        """Test a LidarPoint sequence is accepted."""
        points = [LidarPoint(0.0, 0.0, 1.0, 5.0), LidarPoint(2.0, 0.0, 1.0, 7.0)]
        raster = rasterize_points(points, 2.0, crs_tag="local")
        assert (raster.width, raster.height) == (2, 1)
        assert raster.data[0].tolist() == [5.0, 7.0]
        assert raster.crs_tag == "local"

    def test_invalid_cell_size(self):
        """Test non-positive cell sizes."""
        with pytest.raises(RasterError):
            rasterize_points(self.lattice, 0.0)

    def test_unknown_attribute(self):
        """Test an unsupported attribute name."""
        with pytest.raises(RasterError):
            rasterize_points(self.lattice, 1.0, attribute="return_number")

    def test_empty_point_set(self):
        """Test an empty cloud."""
        with pytest.raises(RasterError):
            rasterize_points(np.zeros((0, 4)), 1.0)
