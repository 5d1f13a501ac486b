"""
Tests for raster grids, geotransforms and sampling.
"""

import math

import numpy as np
import pytest
from src.aerial_lidar_reg.exceptions import RasterBoundsError, RasterError
from src.aerial_lidar_reg.raster.grid import (
    GeoRaster,
    GeoTransform,
    LidarPoint,
    RasterGrid,
    extract_patch,
    pixel_to_world,
    sample_bilinear,
    world_to_pixel,
)


class TestRasterGrid:
    """Test cases for RasterGrid."""

    def test_from_pixels_is_row_major(self):
        """Test flat samples fill rows first."""
        grid = RasterGrid.from_pixels(3, 2, [1, 2, 3, 4, 5, 6])
        assert grid.width == 3
        assert grid.height == 2
        assert grid.data[1, 0] == 4
        assert list(grid.pixels) == [1, 2, 3, 4, 5, 6]

    def test_from_pixels_count_mismatch(self):
        """Test a sample count that does not match the extent."""
        with pytest.raises(RasterError):
            RasterGrid.from_pixels(3, 3, [1, 2, 3])

    def test_rejects_non_finite_samples(self):
        """Test NaN samples need a NaN nodata sentinel."""
        with pytest.raises(RasterError):
            RasterGrid(np.array([[1.0, np.nan]]))

    def test_nan_nodata_mask(self):
        """Test a NaN sentinel marks NaN samples invalid."""
        grid = RasterGrid(np.array([[1.0, np.nan]]), nodata=float("nan"))
        assert grid.valid_mask().tolist() == [[True, False]]

    def test_sentinel_nodata_mask(self):
        """Test a numeric sentinel marks equal samples invalid."""
        grid = RasterGrid(np.array([[1.0, -9999.0], [2.0, 3.0]]), nodata=-9999)
        assert grid.valid_mask().tolist() == [[True, False], [True, True]]
        assert grid.nodata_value() == -9999.0

    def test_data_is_read_only(self):
        """Test samples cannot be modified in place."""
        grid = RasterGrid(np.zeros((2, 2)))
        with pytest.raises(ValueError):
            grid.data[0, 0] = 1.0

    def test_rejects_non_2d(self):
        """Test a 3D array is not a raster."""
        with pytest.raises(RasterError):
            RasterGrid(np.zeros((2, 2, 2)))


class TestGeoTransform:
    """Test cases for GeoTransform."""

    def setup_method(self):
        """Set up test fixtures."""
        self.transform = GeoTransform(100.0, 200.0, 2.0, -2.0)

    def test_pixel_center_convention(self):
        """Test integer pixels map to cell centers."""
        assert pixel_to_world(self.transform, 0, 0) == (101.0, 199.0)
        assert pixel_to_world(self.transform, 3, 1) == (107.0, 195.0)

    def test_world_to_pixel_inverts(self):
        """Test world_to_pixel undoes pixel_to_world on arrays."""
        cols = np.array([0.0, 2.5, 7.25])
        rows = np.array([1.0, 0.5, 3.75])
        x, y = pixel_to_world(self.transform, cols, rows)
        back_cols, back_rows = world_to_pixel(self.transform, x, y)
        assert np.allclose(back_cols, cols)
        assert np.allclose(back_rows, rows)

    def test_rejects_south_up(self):
        """Test positive pixel_size_y is rejected."""
        with pytest.raises(RasterError):
            GeoTransform(0.0, 0.0, 1.0, 1.0)

    def test_rejects_rotation(self):
        """Test rotated transforms are rejected."""
        with pytest.raises(RasterError):
            GeoTransform(0.0, 0.0, 1.0, -1.0, rotation_x=0.1)

    def test_shifted(self):
        """Test the transform of a window starting at (col0, row0)."""
        shifted = self.transform.shifted(2, 3)
        assert shifted.origin_x == 104.0
        assert shifted.origin_y == 194.0


class TestGeoRaster:
    """Test cases for GeoRaster windows and bounds."""

    def setup_method(self):
        """Set up test fixtures."""
        data = np.arange(12, dtype=float).reshape(3, 4)
        self.raster = GeoRaster(RasterGrid(data), GeoTransform(100.0, 200.0, 2.0, -2.0), "EPSG:32633")

    def test_bounds(self):
        """Test bounds cover the outer cell edges."""
        assert self.raster.bounds() == (100.0, 194.0, 108.0, 200.0)
        assert self.raster.cell_size == 2.0

    def test_window(self):
        """Test a window keeps data, georeferencing and CRS tag aligned."""
        window = self.raster.window(1, 1, 2, 2)
        assert window.data.tolist() == [[5.0, 6.0], [9.0, 10.0]]
        assert window.transform.origin_x == 102.0
        assert window.transform.origin_y == 198.0
        assert window.crs_tag == "EPSG:32633"
        assert pixel_to_world(window.transform, 0, 0) == pixel_to_world(self.raster.transform, 1, 1)

    def test_window_out_of_bounds(self):
        """Test a window leaving the raster."""
        with pytest.raises(RasterBoundsError):
            self.raster.window(3, 0, 2, 2)


class TestSampling:
    """Test cases for bilinear sampling and patch extraction."""

    def setup_method(self):
        """Set up test fixtures."""
        self.transform = GeoTransform(0.0, 2.0, 1.0, -1.0)
        self.raster = GeoRaster(RasterGrid(np.array([[0.0, 1.0], [2.0, 3.0]])), self.transform)

    def test_sample_at_cell_center(self):
        """Test sampling a cell center returns the sample."""
        assert sample_bilinear(self.raster, 0.5, 1.5) == 0.0
        assert sample_bilinear(self.raster, 1.5, 0.5) == 3.0

    def test_sample_between_centers(self):
        """Test bilinear interpolation between four samples."""
        assert sample_bilinear(self.raster, 1.0, 1.0) == pytest.approx(1.5)
        assert sample_bilinear(self.raster, 1.0, 1.5) == pytest.approx(0.5)

    def test_sample_outside_is_nodata(self):
        """Test positions outside the sample lattice."""
        assert math.isnan(sample_bilinear(self.raster, 5.0, 5.0))
        assert math.isnan(sample_bilinear(self.raster, 0.25, 1.5))

    def test_sample_next_to_nodata(self):
        """Test a nodata neighbor invalidates the sample."""
        raster = GeoRaster(RasterGrid(np.array([[0.0, 1.0], [2.0, -1.0]]), nodata=-1.0), self.transform)
        assert sample_bilinear(raster, 1.0, 1.0) == -1.0
        assert sample_bilinear(raster, 0.5, 1.5) == 0.0

    def test_extract_patch(self):
        """Test a centered odd-sized patch."""
        grid = RasterGrid(np.arange(25, dtype=float).reshape(5, 5))
        patch = extract_patch(grid, 2, 2, 3)
        assert np.array_equal(patch.data, grid.data[1:4, 1:4])

    def test_extract_even_patch(self):
        """Test even sizes start at center - size // 2."""
        grid = RasterGrid(np.arange(25, dtype=float).reshape(5, 5))
        patch = extract_patch(grid, 2, 2, 2)
        assert np.array_equal(patch.data, grid.data[1:3, 1:3])

    def test_extract_patch_out_of_bounds(self):
        """Test a patch leaving the raster."""
        grid = RasterGrid(np.zeros((5, 5)))
        with pytest.raises(RasterBoundsError):
            extract_patch(grid, 0, 0, 3)


class TestLidarPoint:
    """Test cases for LidarPoint."""

    def test_valid_point(self):
        """Test a regular return."""
        point = LidarPoint(1.0, 2.0, 3.0, 40.0)
        assert point.intensity == 40.0

    def test_negative_intensity(self):
        """Test intensities must be non-negative."""
        with pytest.raises(RasterError):
            LidarPoint(1.0, 2.0, 3.0, -1.0)
