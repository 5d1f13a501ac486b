"""
Tests for the NCC and mutual information baselines.
"""

import math

import numpy as np
import pytest
from src.aerial_lidar_reg.exceptions import MatchingError
from src.aerial_lidar_reg.matcher.phase_correlation import correlation_peak
from src.aerial_lidar_reg.matcher.similarity import mi_map, mutual_information, ncc_map
from src.aerial_lidar_reg.raster.grid import RasterGrid


class TestNccMap:
    """Test cases for ncc_map."""

    def setup_method(self):
        """Set up test fixtures."""
        rng = np.random.default_rng(21)
        self.search = rng.random((20, 20)) * 100.0
        self.template = self.search[5:13, 4:12].copy()

    def test_surface_geometry(self):
        """Test one score per placement, centered on the middle placement."""
        surface = ncc_map(RasterGrid(self.template), RasterGrid(self.search))
        assert surface.values.shape == (13, 13)
        assert (surface.center_col, surface.center_row) == (6, 6)

    def test_finds_template(self):
        """Test the exact placement scores 1."""
        surface = ncc_map(RasterGrid(self.template), RasterGrid(self.search))
        peak = correlation_peak(surface)
        assert surface.offset_of(peak.col, peak.row) == (-2, -1)
        assert peak.value == pytest.approx(1.0)

    def test_invariant_to_gain_and_bias(self):
        """Test a linear intensity change keeps the score."""
        surface = ncc_map(RasterGrid(2.0 * self.template + 5.0), RasterGrid(self.search))
        assert surface.values[5, 4] == pytest.approx(1.0)

    def test_scores_bounded(self):
        """Test scores stay within [-1, 1]."""
        surface = ncc_map(RasterGrid(self.template), RasterGrid(self.search))
        assert surface.values.min() >= -1.0
        assert surface.values.max() <= 1.0

    def test_flat_window_scores_zero(self):
        """Test placements over a constant region."""
        search = self.search.copy()
        search[:8, :8] = 7.0
        surface = ncc_map(RasterGrid(self.template), RasterGrid(search))
        assert surface.values[0, 0] == 0.0

    def test_constant_template(self):
        """Test a template without variance."""
        with pytest.raises(MatchingError):
            ncc_map(RasterGrid(np.ones((4, 4))), RasterGrid(self.search))

    def test_template_larger_than_search(self):
        """Test the template must fit in the search image."""
        with pytest.raises(MatchingError):
            ncc_map(RasterGrid(self.search), RasterGrid(self.template))


class TestMutualInformation:
    """Test cases for mutual_information and mi_map."""

    def setup_method(self):
        """Set up test fixtures."""
        rng = np.random.default_rng(8)
        self.search = rng.integers(0, 8, size=(24, 24)).astype(float)
        self.template = self.search[6:14, 7:15].copy()

    def test_independent_histogram(self):
        """Test a product joint distribution carries no information."""
        assert mutual_information(np.ones((2, 2))) == pytest.approx(0.0)

    def test_deterministic_histogram(self):
        """Test a one-to-one joint distribution over two states, with the bias term."""
        assert mutual_information(50.0 * np.eye(2)) == pytest.approx(math.log(2.0) + 1.0 / 200)

    def test_never_negative(self):
        """Test sampling noise below zero is clamped."""
        assert mutual_information(np.array([[30.0, 20.0], [20.0, 31.0]])) >= 0.0

    def test_finds_template(self):
        """Test the true placement maximizes mutual information."""
        surface = mi_map(RasterGrid(self.template), RasterGrid(self.search), bins=8)
        assert surface.values.shape == (17, 17)
        peak = correlation_peak(surface)
        assert surface.offset_of(peak.col, peak.row) == (-1, -2)

    def test_invariant_to_level_permutation(self):
        """Test relabelling intensity levels does not move the peak."""
        permutation = np.array([5.0, 2.0, 7.0, 0.0, 3.0, 6.0, 1.0, 4.0])
        remapped = permutation[self.template.astype(int)]
        plain = mi_map(RasterGrid(self.template), RasterGrid(self.search), bins=8)
        permuted = mi_map(RasterGrid(remapped), RasterGrid(self.search), bins=8)
        assert permuted.values[6, 7] == pytest.approx(plain.values[6, 7])
        peak = correlation_peak(permuted)
        assert (peak.col, peak.row) == (7, 6)

    def test_single_valued_window_scores_zero(self):
        """Test placements over a constant region."""
        search = self.search.copy()
        search[:8, :8] = 3.0
        surface = mi_map(RasterGrid(self.template), RasterGrid(search), bins=8)
        assert surface.values[0, 0] == 0.0

    def test_too_few_bins(self):
        """Test at least two bins are needed."""
        with pytest.raises(MatchingError):
            mi_map(RasterGrid(self.template), RasterGrid(self.search), bins=1)

    def test_single_valued_template(self):
        """Test a constant template."""
        with pytest.raises(MatchingError):
            mi_map(RasterGrid(np.ones((4, 4))), RasterGrid(self.search))


class TestMutualInformationContinuous:
    """Test cases for mi_map on continuous intensities."""

    def setup_method(self):
        """Set up test fixtures."""
        rng = np.random.default_rng(30)
        self.search = rng.random((40, 40))
        self.template = self.search[10:26, 12:28].copy()

    def test_invariant_to_monotone_remap(self):
        """Test a strictly increasing nonlinear remap keeps every score."""
        plain = mi_map(RasterGrid(self.template), RasterGrid(self.search), bins=32)
        remapped = mi_map(RasterGrid(np.exp(6.0 * self.template) ** 3), RasterGrid(self.search),
                          bins=32)
        assert np.allclose(remapped.values, plain.values)
        peak = correlation_peak(remapped)
        assert remapped.offset_of(peak.col, peak.row) == (0, -2)

    def test_identical_window_scores_template_entropy(self):
        """Test 256 distinct values over 32 bins give log 32 plus the bias term."""
        surface = mi_map(RasterGrid(self.template), RasterGrid(self.search), bins=32)
        assert surface.values[10, 12] == pytest.approx(math.log(32.0) + 31.0 / 512)

    def test_independent_windows_score_near_zero(self):
        """Test unrelated 64x64 windows stay under 0.1 nats with 32 bins."""
        rng = np.random.default_rng(31)
        for _ in range(10):
            template = RasterGrid(rng.random((64, 64)))
            search = RasterGrid(rng.random((64, 64)))
            surface = mi_map(template, search, bins=32)
            assert surface.values.shape == (1, 1)
            assert surface.values[0, 0] < 0.1
