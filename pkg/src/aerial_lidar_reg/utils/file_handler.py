"""
File handling utilities for aerial-lidar-reg.

Raster container: `<name>.flt` holds little-endian float32 samples in row
order and `<name>.hdr` a `key = value` header with width, height, the six
geotransform terms, nodata and crs_tag. 8- and 16-bit PGM images are read
through Pillow with an optional ESRI world file next to them.
"""

import csv
import io
import math
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from PIL import Image

from ..descriptor.cfog import DescriptorVolume
from ..detector.fast import InterestPoint
from ..exceptions import RasterFormatError
from ..geometry.camera import CameraIntrinsics, CameraPose
from ..matcher.template_matcher import MatchCandidate
from ..orientation.resection import ResectionResult, correction_table
from ..raster.grid import GeoRaster, GeoTransform, RasterGrid
from ..raster.rasterizer import points_as_array

HEADER_KEYS = ("width", "height", "origin_x", "origin_y", "pixel_size_x",
               "pixel_size_y", "rotation_x", "rotation_y", "nodata", "crs_tag")
CAMERA_KEYS = ("f_m", "pixel_size_m", "principal_col", "principal_row", "image_width",
               "image_height", "Xs_m", "Ys_m", "Zs_m", "phi_deg", "omega_deg", "kappa_deg")
PGM_EXTENSIONS = {"pgm"}
WORLD_FILE_SUFFIXES = (".pgw", ".wld")
CONTROL_POINT_COLUMNS = ("aerial_col", "aerial_row", "ground_X", "ground_Y", "ground_Z",
                         "offset_dx", "offset_dy", "peak", "confidence")
MATCH_COLUMNS = ("index",) + CONTROL_POINT_COLUMNS + ("accepted", "inlier", "residual", "reason")
REPORT_ELEMENTS = {"X_S": "X_S_m", "Y_S": "Y_S_m", "Z_S": "Z_S_m",
                   "phi": "phi_deg", "omega": "omega_deg", "kappa": "kappa_deg"}


def parse_key_values(text: str, source: str = "<text>") -> Dict[str, str]:
    """
    Parse `key = value` lines up to the first `[section]` line.

    Blank lines and lines starting with '#' are skipped.
    """
    values: Dict[str, str] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("["):
            break
        if "=" not in line:
            raise RasterFormatError(f"{source}:{number}: expected 'key = value', got '{line}'")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def _number(values: Dict[str, str], key: str, source: str) -> float:
    if key not in values:
        raise RasterFormatError(f"{source}: missing key '{key}'")
    try:
        return float(values[key])
    except ValueError:
        raise RasterFormatError(f"{source}: '{key}' is not a number: '{values[key]}'")


def _integer(values: Dict[str, str], key: str, source: str) -> int:
    number = _number(values, key, source)
    if not number.is_integer():
        raise RasterFormatError(f"{source}: '{key}' must be an integer, got {values[key]}")
    return int(number)


class FileHandler:
    """Handles file I/O for rasters, point clouds, camera files and run artifacts."""

    def read_file(self, file_path: Path) -> str:
        """
        Read content from a text file.

        Raises:
            FileNotFoundError: If file doesn't exist
            IOError: If file cannot be read
        """
        try:
            with open(file_path, 'r', encoding='utf-8') as file:
                return file.read()
        except FileNotFoundError:
            raise FileNotFoundError(f"File not found: {file_path}")
        except IOError as e:
            raise IOError(f"Error reading file {file_path}: {str(e)}")

    def read_bytes(self, file_path: Path) -> bytes:
        try:
            return Path(file_path).read_bytes()
        except FileNotFoundError:
            raise FileNotFoundError(f"File not found: {file_path}")
        except IOError as e:
            raise IOError(f"Error reading file {file_path}: {str(e)}")

    def write_file(self, file_path: Path, content: str) -> None:
        """
        Write text content to a file, creating parent directories.

        Raises:
            IOError: If file cannot be written
        """
        file_path = Path(file_path)
        try:
            file_path.parent.mkdir(parents=True, exist_ok=True)
            with open(file_path, 'w', encoding='utf-8', newline='') as file:
                file.write(content)
        except IOError as e:
            raise IOError(f"Error writing file {file_path}: {str(e)}")

    def write_bytes(self, file_path: Path, content: bytes) -> None:
        file_path = Path(file_path)
        try:
            file_path.parent.mkdir(parents=True, exist_ok=True)
            file_path.write_bytes(content)
        except IOError as e:
            raise IOError(f"Error writing file {file_path}: {str(e)}")

    def file_exists(self, file_path: Path) -> bool:
        return Path(file_path).exists() and Path(file_path).is_file()

    def get_file_extension(self, file_path: Path) -> str:
        """File extension, lower case, without the dot."""
        return Path(file_path).suffix.lstrip('.').lower()

    # Rasters

    def load_raster(self, file_path: Path) -> GeoRaster:
        """
        Load a georeferenced raster.

        Args:
            file_path: `.flt`/`.hdr` pair (either name) or a `.pgm` image

        Returns:
            GeoRaster with float samples

        Raises:
            FileNotFoundError: If a file is missing
            RasterFormatError: On a malformed header or a size mismatch
        """
        file_path = Path(file_path)
        if self.get_file_extension(file_path) in PGM_EXTENSIONS:
            return self.load_pgm(file_path)

        header_path = file_path.with_suffix(".hdr")
        payload_path = file_path.with_suffix(".flt")
        source = str(header_path)
        header = parse_key_values(self.read_file(header_path), source)
        width = _integer(header, "width", source)
        height = _integer(header, "height", source)
        nodata_text = header.get("nodata", "none").lower()
        nodata = None if nodata_text in ("", "none") else _number(header, "nodata", source)

        payload = self.read_bytes(payload_path)
        if len(payload) != width * height * 4:
            raise RasterFormatError(
                f"{payload_path}: header declares {width}x{height} samples "
                f"({width * height * 4} bytes) but payload has {len(payload)} bytes"
            )
        samples = np.frombuffer(payload, dtype="<f4").astype(np.float64)
        transform = GeoTransform(*(_number(header, key, source) for key in HEADER_KEYS[2:8]))
        grid = RasterGrid.from_pixels(width, height, samples, nodata)
        return GeoRaster(grid, transform, header.get("crs_tag", ""))

    def save_raster(self, raster: GeoRaster, file_path: Path) -> None:
        """Write the `.flt` payload and its `.hdr` header."""
        file_path = Path(file_path)
        values = dict(zip(HEADER_KEYS[2:8], raster.transform.as_tuple()))
        lines = [f"width = {raster.width}", f"height = {raster.height}"]
        lines += [f"{key} = {value!r}" for key, value in values.items()]
        lines.append(f"nodata = {'none' if raster.nodata is None else repr(raster.nodata)}")
        lines.append(f"crs_tag = {raster.crs_tag}")
        self.write_file(file_path.with_suffix(".hdr"), "\n".join(lines) + "\n")
        self.write_bytes(file_path.with_suffix(".flt"), raster.data.astype("<f4").tobytes())

    def load_pgm(self, file_path: Path) -> GeoRaster:
        """8- or 16-bit PGM georeferenced by an optional world file (unit pixels otherwise)."""
        try:
            with Image.open(file_path) as image:
                data = np.asarray(image, dtype=np.float64)
        except FileNotFoundError:
            raise FileNotFoundError(f"File not found: {file_path}")
        except (OSError, ValueError) as e:
            raise RasterFormatError(f"{file_path}: cannot decode PGM image: {e}")
        if data.ndim != 2:
            raise RasterFormatError(f"{file_path}: expected a single-band image, got shape {data.shape}")

        transform = GeoTransform(0.0, 0.0, 1.0, -1.0)
        for suffix in WORLD_FILE_SUFFIXES:
            world_path = Path(file_path).with_suffix(suffix)
            if self.file_exists(world_path):
                transform = self.read_world_file(world_path)
                break
        return GeoRaster(RasterGrid(data), transform)

    def read_world_file(self, file_path: Path) -> GeoTransform:
        """
        Six-line ESRI world file: A, D, B, E, C, F with (C, F) the center of
        the upper-left pixel.
        """
        lines = [line.strip() for line in self.read_file(file_path).splitlines() if line.strip()]
        if len(lines) != 6:
            raise RasterFormatError(f"{file_path}: world file needs 6 lines, got {len(lines)}")
        try:
            a, d, b, e, c, f = (float(v) for v in lines)
        except ValueError:
            raise RasterFormatError(f"{file_path}: world file lines must be numbers")
        return GeoTransform(c - a / 2.0, f - e / 2.0, a, e, b, d)

    def write_world_file(self, transform: GeoTransform, file_path: Path) -> None:
        """Six-line world file for an image laid out on transform."""
        t = transform
        values = (t.pixel_size_x, t.rotation_y, t.rotation_x, t.pixel_size_y,
                  t.origin_x + t.pixel_size_x / 2.0, t.origin_y + t.pixel_size_y / 2.0)
        self.write_file(file_path, "\n".join(repr(float(v)) for v in values) + "\n")

    def save_image_u8(self, data: np.ndarray, file_path: Path) -> None:
        """Write an 8-bit grayscale image; the format follows the extension."""
        file_path = Path(file_path)
        file_path.parent.mkdir(parents=True, exist_ok=True)
        try:
            Image.fromarray(np.asarray(data, dtype=np.uint8)).save(file_path)
        except (OSError, ValueError) as e:
            raise IOError(f"Error writing image {file_path}: {str(e)}")

    # Point clouds

    def load_point_cloud(self, file_path: Path) -> np.ndarray:
        """
        ASCII `x y z intensity` lines, '#' comments ignored.

        Returns:
            (N, 4) float array

        Raises:
            RasterFormatError: On an empty or malformed cloud
        """
        text = self.read_file(file_path)
        try:
            points = np.loadtxt(io.StringIO(text), comments="#", ndmin=2, dtype=np.float64)
        except ValueError as e:
            raise RasterFormatError(f"{file_path}: malformed point cloud: {e}")
        if points.size == 0:
            raise RasterFormatError(f"{file_path}: point cloud is empty")
        if points.shape[1] != 4:
            raise RasterFormatError(
                f"{file_path}: expected 4 columns (x y z intensity), got {points.shape[1]}"
            )
        return points_as_array(points)

    # Camera files

    def load_camera(self, file_path: Path) -> Tuple[CameraPose, CameraIntrinsics]:
        """Read a pose + intrinsics file; angles are degrees on disk."""
        source = str(file_path)
        values = parse_key_values(self.read_file(file_path), source)
        missing = [key for key in CAMERA_KEYS if key not in values]
        if missing:
            raise RasterFormatError(f"{source}: missing keys {', '.join(missing)}")
        intr = CameraIntrinsics(
            f=_number(values, "f_m", source),
            pixel_size=_number(values, "pixel_size_m", source),
            principal_col=_number(values, "principal_col", source),
            principal_row=_number(values, "principal_row", source),
            image_width=_integer(values, "image_width", source),
            image_height=_integer(values, "image_height", source),
        )
        pose = CameraPose(
            _number(values, "Xs_m", source),
            _number(values, "Ys_m", source),
            _number(values, "Zs_m", source),
            math.radians(_number(values, "phi_deg", source)),
            math.radians(_number(values, "omega_deg", source)),
            math.radians(_number(values, "kappa_deg", source)),
        )
        return pose, intr

    def format_camera(self, pose: CameraPose, intr: CameraIntrinsics) -> List[str]:
        values = (intr.f, intr.pixel_size, intr.principal_col, intr.principal_row,
                  intr.image_width, intr.image_height, pose.X_S, pose.Y_S, pose.Z_S,
                  math.degrees(pose.phi), math.degrees(pose.omega), math.degrees(pose.kappa))
        return [f"{key} = {value!r}" for key, value in zip(CAMERA_KEYS, values)]

    def format_pose_report(self, result: ResectionResult) -> List[str]:
        """Initial / Correction / Final block with the final RMSE."""
        lines = [
            "[report]",
            f"rmse_px = {result.rmse!r}",
            f"iterations = {result.iterations}",
            f"converged = {str(result.converged).lower()}",
            f"# {'element':<10} {'initial':>20} {'correction':>20} {'final':>20}",
        ]
        for name, initial, correction, final in correction_table(result):
            lines.append(f"{REPORT_ELEMENTS[name]:<12} {initial:>20.6f} {correction:>20.6f} {final:>20.6f}")
        return lines

    def write_pose(self, file_path: Path, pose: CameraPose, intr: CameraIntrinsics,
                   result: Optional[ResectionResult] = None) -> None:
        """Write a camera file; with a result, append the correction report block."""
        lines = self.format_camera(pose, intr)
        if result is not None:
            lines += [""] + self.format_pose_report(result)
        self.write_file(file_path, "\n".join(lines) + "\n")

    # CSV artifacts

    def _write_csv(self, file_path: Path, header: Sequence[str], rows) -> None:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        self.write_file(file_path, buffer.getvalue())

    def write_interest_points(self, file_path: Path, points: Sequence[InterestPoint]) -> None:
        self._write_csv(file_path, ("col", "row", "score"),
                        ((p.col, p.row, p.score) for p in points))

    def write_control_points(self, file_path: Path, candidates: Sequence[MatchCandidate]) -> None:
        """One row per candidate with the control point columns."""
        self._write_csv(file_path, CONTROL_POINT_COLUMNS,
                        ([getattr(c, name) for name in CONTROL_POINT_COLUMNS] for c in candidates))

    def write_matches(self, file_path: Path, candidates: Sequence[MatchCandidate],
                      residuals: Optional[Dict[int, float]] = None) -> None:
        """
        Every candidate with its acceptance state.

        Args:
            file_path: Output CSV
            candidates: All match candidates
            residuals: Final residual per inlier candidate index
        """
        residuals = residuals or {}
        rows = []
        for c in candidates:
            inlier = c.index in residuals
            rows.append([c.index] + [getattr(c, name) for name in CONTROL_POINT_COLUMNS]
                        + [int(c.accepted), int(inlier),
                           residuals[c.index] if inlier else "", c.reason])
        self._write_csv(file_path, MATCH_COLUMNS, rows)

    def read_control_points(self, file_path: Path) -> List[Dict[str, float]]:
        """Rows of a control point CSV as floats keyed by column."""
        reader = csv.DictReader(io.StringIO(self.read_file(file_path)))
        if tuple(reader.fieldnames or ()) != CONTROL_POINT_COLUMNS:
            raise RasterFormatError(f"{file_path}: unexpected columns {reader.fieldnames}")
        return [{key: float(value) for key, value in row.items()} for row in reader]

    # Descriptor volumes

    def save_volume(self, volume: DescriptorVolume, file_path: Path) -> None:
        """Header (width, height, m) as int32, then float32 samples channel by channel."""
        header = np.array([volume.width, volume.height, volume.m], dtype="<i4").tobytes()
        payload = np.moveaxis(volume.values, 2, 0).astype("<f4").tobytes()
        self.write_bytes(file_path, header + payload)

    def load_volume(self, file_path: Path) -> DescriptorVolume:
        content = self.read_bytes(file_path)
        if len(content) < 12:
            raise RasterFormatError(f"{file_path}: volume header is truncated")
        width, height, m = (int(v) for v in np.frombuffer(content[:12], dtype="<i4"))
        if min(width, height, m) < 1:
            raise RasterFormatError(f"{file_path}: invalid volume size {width}x{height}x{m}")
        expected = width * height * m * 4
        if len(content) - 12 != expected:
            raise RasterFormatError(
                f"{file_path}: expected {expected} payload bytes, got {len(content) - 12}"
            )
        values = np.frombuffer(content[12:], dtype="<f4").astype(np.float64).reshape(m, height, width)
        return DescriptorVolume(np.moveaxis(values, 0, 2))
