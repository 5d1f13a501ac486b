"""
Tests for file handling utilities.
"""

import math

import numpy as np
import pytest
from PIL import Image
from src.aerial_lidar_reg.descriptor.cfog import DescriptorVolume
from src.aerial_lidar_reg.exceptions import RasterFormatError
from src.aerial_lidar_reg.geometry.camera import CameraIntrinsics, CameraPose
from src.aerial_lidar_reg.matcher.template_matcher import MatchCandidate
from src.aerial_lidar_reg.raster.grid import GeoRaster, GeoTransform, RasterGrid
from src.aerial_lidar_reg.utils.file_handler import (
    CONTROL_POINT_COLUMNS,
    MATCH_COLUMNS,
    FileHandler,
    parse_key_values,
)


class TestFileHandler:
    """Test cases for FileHandler."""

    def setup_method(self):
        """Set up test fixtures."""
        self.file_handler = FileHandler()
        self.raster = GeoRaster(
            RasterGrid(np.arange(12, dtype=float).reshape(3, 4), nodata=-9999.0),
            GeoTransform(500000.0, 4000300.0, 0.5, -0.5),
            "EPSG:32633",
        )

    def test_file_extension(self):
        """Test extensions are lower case without the dot."""
        assert self.file_handler.get_file_extension("scene/Intensity.FLT") == "flt"

    def test_write_and_read_text(self, tmp_path):
        """Test text round trip with parent directory creation."""
        path = tmp_path / "nested" / "note.txt"
        self.file_handler.write_file(path, "hello\n")
        assert self.file_handler.file_exists(path)
        assert self.file_handler.read_file(path) == "hello\n"

    def test_read_missing_file(self, tmp_path):
        """Test a missing file."""
        with pytest.raises(FileNotFoundError):
            self.file_handler.read_file(tmp_path / "absent.txt")

    def test_raster_round_trip(self, tmp_path):
        """Test .flt/.hdr save and load keep samples, georeferencing and tags."""
        path = tmp_path / "intensity.flt"
        self.file_handler.save_raster(self.raster, path)
        assert (tmp_path / "intensity.hdr").exists()
        loaded = self.file_handler.load_raster(tmp_path / "intensity.hdr")
        assert np.array_equal(loaded.data, self.raster.data)
        assert loaded.transform == self.raster.transform
        assert loaded.nodata == -9999.0
        assert loaded.crs_tag == "EPSG:32633"

    def test_payload_is_little_endian_float32(self, tmp_path):
        """Test the payload layout."""
        path = tmp_path / "intensity.flt"
        self.file_handler.save_raster(self.raster, path)
        payload = np.frombuffer(path.read_bytes(), dtype="<f4")
        assert payload.tolist() == list(range(12))

    def test_raster_without_nodata(self, tmp_path):
        """Test nodata = none."""
        raster = GeoRaster(RasterGrid(np.ones((2, 2))), GeoTransform(0.0, 2.0, 1.0, -1.0))
        self.file_handler.save_raster(raster, tmp_path / "ones.flt")
        assert "nodata = none" in (tmp_path / "ones.hdr").read_text()
        assert self.file_handler.load_raster(tmp_path / "ones.flt").nodata is None

    def test_payload_size_mismatch(self, tmp_path):
        """Test a payload that does not match the header."""
        self.file_handler.save_raster(self.raster, tmp_path / "bad.flt")
        (tmp_path / "bad.flt").write_bytes(b"\x00" * 8)
        with pytest.raises(RasterFormatError):
            self.file_handler.load_raster(tmp_path / "bad.flt")

    def test_header_missing_key(self, tmp_path):
        """Test a header without origin_x."""
        self.file_handler.save_raster(self.raster, tmp_path / "bad.flt")
        header = (tmp_path / "bad.hdr").read_text().replace("origin_x", "origin")
        (tmp_path / "bad.hdr").write_text(header)
        with pytest.raises(RasterFormatError):
            self.file_handler.load_raster(tmp_path / "bad.flt")

    def test_pgm_with_world_file(self, tmp_path):
        """Test an 8-bit PGM georeferenced by its world file."""
        data = np.arange(20, dtype=np.uint8).reshape(4, 5)
        Image.fromarray(data).save(tmp_path / "aerial.pgm")
        (tmp_path / "aerial.pgw").write_text("2\n0\n0\n-2\n101\n199\n")
        raster = self.file_handler.load_raster(tmp_path / "aerial.pgm")
        assert raster.data.tolist() == data.astype(float).tolist()
        assert raster.transform == GeoTransform(100.0, 200.0, 2.0, -2.0)

    def test_world_file_round_trip(self, tmp_path):
        """Test writing then reading a world file."""
        transform = GeoTransform(100.0, 200.0, 2.0, -2.0)
        self.file_handler.write_world_file(transform, tmp_path / "a.pgw")
        assert self.file_handler.read_world_file(tmp_path / "a.pgw") == transform

    def test_point_cloud(self, tmp_path):
        """Test ASCII clouds with comments."""
        path = tmp_path / "cloud.xyz"
        path.write_text("# x y z intensity\n0 0 10 5\n1 0 11 6\n")
        points = self.file_handler.load_point_cloud(path)
        assert points.shape == (2, 4)
        assert points[1].tolist() == [1.0, 0.0, 11.0, 6.0]

    def test_point_cloud_wrong_columns(self, tmp_path):
        """Test clouds must have four columns."""
        path = tmp_path / "cloud.xyz"
        path.write_text("0 0 10\n1 0 11\n")
        with pytest.raises(RasterFormatError):
            self.file_handler.load_point_cloud(path)

    def test_camera_file_uses_degrees(self, tmp_path):
        """Test angles are read in degrees and held in radians."""
        path = tmp_path / "camera.txt"
        path.write_text(
            "f_m = 0.05\npixel_size_m = 5e-5\nprincipal_col = 499.5\nprincipal_row = 499.5\n"
            "image_width = 1000\nimage_height = 1000\nXs_m = 10\nYs_m = 20\nZs_m = 900\n"
            "phi_deg = 1.5\nomega_deg = -0.5\nkappa_deg = 90\n"
        )
        pose, intr = self.file_handler.load_camera(path)
        assert pose.kappa == pytest.approx(math.pi / 2)
        assert pose.phi == pytest.approx(math.radians(1.5))
        assert intr.image_width == 1000
        assert intr.f == 0.05

    def test_camera_missing_keys(self, tmp_path):
        """Test incomplete camera files."""
        path = tmp_path / "camera.txt"
        path.write_text("f_m = 0.05\n")
        with pytest.raises(RasterFormatError):
            self.file_handler.load_camera(path)

    def test_pose_round_trip(self, tmp_path):
        """Test a written pose file reads back as the same camera."""
        pose = CameraPose(10.0, 20.0, 900.0, 0.01, -0.02, 0.3)
        intr = CameraIntrinsics(0.05, 5e-5, 499.5, 499.5, 1000, 1000)
        self.file_handler.write_pose(tmp_path / "pose.txt", pose, intr)
        loaded_pose, loaded_intr = self.file_handler.load_camera(tmp_path / "pose.txt")
        assert np.allclose(loaded_pose.as_vector(), pose.as_vector())
        assert loaded_intr == intr

    def test_matches_csv(self, tmp_path):
        """Test every candidate is listed with acceptance and residual."""
        accepted = MatchCandidate(0, 10.0, 20.0, 1.0, 2.0, 3.0, -7.0, 0.5, 0.3, 2.5, True)
        rejected = MatchCandidate(1, 30.0, 40.0, reason="offset beyond radius")
        path = tmp_path / "matches.csv"
        self.file_handler.write_matches(path, [accepted, rejected], {0: 0.25})
        lines = path.read_text().splitlines()
        assert lines[0] == ",".join(MATCH_COLUMNS)
        assert lines[1].endswith(",1,1,0.25,")
        assert lines[2].endswith(",0,0,,offset beyond radius")

    def test_control_points_csv(self, tmp_path):
        """Test control point rows read back as floats."""
        accepted = MatchCandidate(0, 10.0, 20.0, 1.0, 2.0, 3.0, -7.0, 0.5, 0.3, 2.5, True)
        path = tmp_path / "control_points.csv"
        self.file_handler.write_control_points(path, [accepted])
        rows = self.file_handler.read_control_points(path)
        assert len(rows) == 1
        assert rows[0]["offset_dx"] == -7.0
        assert tuple(rows[0]) == CONTROL_POINT_COLUMNS

    def test_volume_round_trip(self, tmp_path):
        """Test descriptor volume dumps."""
        values = np.arange(24, dtype=float).reshape(2, 3, 4)
        self.file_handler.save_volume(DescriptorVolume(values), tmp_path / "d.vol")
        loaded = self.file_handler.load_volume(tmp_path / "d.vol")
        assert loaded.shape == (2, 3, 4)
        assert np.array_equal(loaded.values, values)


class TestParseKeyValues:
    """Test cases for parse_key_values."""

    def test_stops_at_section(self):
        """Test parsing ends at the first section line."""
        values = parse_key_values("# c\na = 1\n\nb = two\n[report]\nc = 3\n")
        assert values == {"a": "1", "b": "two"}

    def test_malformed_line(self):
        """Test lines without '='."""
        with pytest.raises(RasterFormatError):
            parse_key_values("width 3\n")
