"""
Local geometric correction of aerial patches onto a north-up ground grid.
"""

import logging
from typing import Optional

import numpy as np

from ..exceptions import GeometryError
from ..raster.grid import GeoRaster, GeoTransform, RasterGrid, bilinear_at_pixels, sample_bilinear_many
from .camera import CameraIntrinsics, CameraPose, project_points

logger = logging.getLogger(__name__)

RECTIFIED_NODATA = -9999.0


def rectify_to_grid(aerial: RasterGrid, pose: CameraPose, intr: CameraIntrinsics,
                    dsm: GeoRaster, transform: GeoTransform, width: int, height: int,
                    nodata: float = RECTIFIED_NODATA) -> GeoRaster:
    """
    Resample the aerial image onto a ground grid.

    Each output cell center takes its height from the DSM, is projected into
    the aerial image with the collinearity equation and sampled bilinearly.
    Cells that project outside the image, or sit on DSM nodata, are nodata.

    Args:
        aerial: Aerial image
        pose: Exterior orientation used for the projection
        intr: Interior orientation
        dsm: Elevation raster
        transform: Output grid georeferencing
        width: Output columns
        height: Output rows
        nodata: Sentinel for cells without an aerial sample

    Returns:
        Rectified patch georeferenced by transform

    Raises:
        GeometryError: If the output window leaves the DSM extent
    """
    if width < 1 or height < 1:
        raise GeometryError(f"Output size must be positive, got {width}x{height}")
    if aerial.width != intr.image_width or aerial.height != intr.image_height:
        raise GeometryError(
            f"Aerial image is {aerial.width}x{aerial.height} but intrinsics describe "
            f"{intr.image_width}x{intr.image_height}"
        )

    corner_x, corner_y = transform.pixel_to_world(np.array([0, width - 1]), np.array([0, height - 1]))
    dsm_cols, dsm_rows = dsm.transform.world_to_pixel(corner_x, corner_y)
    if (dsm_cols.min() < 0 or dsm_cols.max() > dsm.width - 1
            or dsm_rows.min() < 0 or dsm_rows.max() > dsm.height - 1):
        raise GeometryError("Rectification window lies outside the DSM extent")

    cols, rows = np.meshgrid(np.arange(width), np.arange(height))
    X, Y = transform.pixel_to_world(cols, rows)
    Z, z_valid = sample_bilinear_many(dsm, X, Y)
    aerial_cols, aerial_rows, in_front = project_points(pose, intr, X, Y, np.where(z_valid, Z, 0.0))
    values, valid = bilinear_at_pixels(aerial, aerial_cols, aerial_rows)
    ok = z_valid & in_front & valid

    logger.debug("Rectified %dx%d window, %d cells without data", width, height, int((~ok).sum()))
    return GeoRaster(RasterGrid(np.where(ok, values, nodata), nodata), transform, dsm.crs_tag)


def rectify_patch(aerial: RasterGrid, pose: CameraPose, intr: CameraIntrinsics, dsm: GeoRaster,
                  center_X: float, center_Y: float, out_size: int,
                  gsd: Optional[float] = None) -> GeoRaster:
    """
    Rectify an out_size x out_size ground window centered on (center_X, center_Y).

    The ground sample distance defaults to the DSM cell size so the result
    differs from the LiDAR rasters by a translation only.
    """
    if out_size < 1:
        raise GeometryError(f"Output size must be positive, got {out_size}")
    gsd = dsm.cell_size if gsd is None else gsd
    if not gsd > 0:
        raise GeometryError(f"Ground sample distance must be > 0, got {gsd}")
    half = out_size * gsd / 2.0
    transform = GeoTransform(center_X - half, center_Y + half, gsd, -gsd)
    return rectify_to_grid(aerial, pose, intr, dsm, transform, out_size, out_size)
