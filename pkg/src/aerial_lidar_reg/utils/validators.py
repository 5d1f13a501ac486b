"""
Input validation utilities for aerial-lidar-reg.
"""

from typing import TYPE_CHECKING, List, Optional

from ..detector.fast import RADIUS, DetectorParams
from ..geometry.camera import CameraIntrinsics
from ..matcher.template_matcher import MatchParams
from ..raster.grid import GeoRaster, RasterGrid
from .file_handler import FileHandler

if TYPE_CHECKING:
    from ..pipeline.config import PipelineConfig


class InputValidator:
    """Validates registration inputs beyond what the parameter types check themselves."""

    def __init__(self):
        self.file_handler = FileHandler()

    def validate_tile_size(self, tile: int) -> bool:
        return isinstance(tile, int) and tile >= 1

    def validate_detector_fit(self, params: DetectorParams, width: int, height: int) -> bool:
        """
        Check the image can be split into grid_n x grid_n cells that each
        hold a full FAST circle.

        Args:
            params: Detector parameters
            width: Image columns
            height: Image rows

        Returns:
            True if every cell is at least 2 * RADIUS + 1 pixels wide and tall
        """
        minimum = params.grid_n * (2 * RADIUS + 1)
        return width >= minimum and height >= minimum

    def validate_patch_fit(self, params: MatchParams, raster: GeoRaster) -> bool:
        """True if one matching window fits inside the raster."""
        return raster.width >= params.patch_size and raster.height >= params.patch_size

    def validate_intrinsics(self, intr: CameraIntrinsics, aerial: RasterGrid) -> bool:
        return intr.image_width == aerial.width and intr.image_height == aerial.height

    def get_validation_errors(self, config: "PipelineConfig") -> List[str]:
        """
        Get configuration problems that can be found without loading data.

        Returns:
            List of validation error messages
        """
        errors = []
        for name in config.missing_inputs():
            errors.append(f"Missing input path: {name}")
        for name, path in (("aerial", config.aerial_path), ("camera", config.camera_path),
                           ("lidar_intensity", config.lidar_path), ("dsm", config.dsm_path)):
            if path is not None and not self._input_exists(path):
                errors.append(f"Input file not found: {name} = {path}")
        if not config.rmse_target > 0:
            errors.append(f"rmse_target must be > 0, got {config.rmse_target}")
        if config.max_rounds < 1:
            errors.append(f"max_rounds must be >= 1, got {config.max_rounds}")
        if config.workers < 1:
            errors.append(f"workers must be >= 1, got {config.workers}")
        if not self.validate_tile_size(config.checkerboard_tile):
            errors.append(f"checkerboard_tile must be >= 1, got {config.checkerboard_tile}")
        return errors

    def get_data_errors(self, config: "PipelineConfig", aerial: RasterGrid, intr: CameraIntrinsics,
                        lidar: GeoRaster, dsm: Optional[GeoRaster] = None) -> List[str]:
        """Problems between loaded inputs and the configured parameters."""
        errors = []
        if not self.validate_intrinsics(intr, aerial):
            errors.append(
                f"Aerial image is {aerial.width}x{aerial.height} but the camera file describes "
                f"{intr.image_width}x{intr.image_height}"
            )
        if not self.validate_detector_fit(config.detector, aerial.width, aerial.height):
            errors.append(
                f"Aerial image {aerial.width}x{aerial.height} is too small for a "
                f"{config.detector.grid_n}x{config.detector.grid_n} detector grid"
            )
        if not self.validate_patch_fit(config.matcher, lidar):
            errors.append(
                f"LiDAR raster {lidar.width}x{lidar.height} is smaller than one "
                f"{config.matcher.patch_size}-pixel matching window"
            )
        if dsm is not None and not lidar.crs_tag == dsm.crs_tag:
            errors.append(f"CRS tags differ: '{lidar.crs_tag}' vs '{dsm.crs_tag}'")
        return errors

    def _input_exists(self, path) -> bool:
        if self.file_handler.file_exists(path):
            return True
        # A raster may be named by its payload or header; either half suffices here.
        return any(self.file_handler.file_exists(path.with_suffix(s)) for s in (".hdr", ".flt"))
