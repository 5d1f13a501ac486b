"""
Synthetic aerial/LiDAR scenes with known geometry.

The LiDAR intensity raster is a corner-rich texture on a smooth DSM. The
aerial image is rendered by casting every pixel ray of a true camera pose
onto the DSM and sampling the texture there; an optional nonlinear,
inverting intensity remap imitates the radiometric gap between the two
sensors. The initial pose handed to the pipeline is the true pose plus a
known bias.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage

from .geometry.camera import CameraIntrinsics, CameraPose, intersect_dsm_many
from .raster.grid import GeoRaster, GeoTransform, RasterGrid, sample_bilinear_many

logger = logging.getLogger(__name__)

DEFAULT_BIAS = (10.0, 10.0, 5.0, np.radians(0.3), np.radians(0.3), np.radians(0.5))
AERIAL_NODATA = 0.0


@dataclass(frozen=True, eq=False)
class SyntheticScene:
    """A rendered pair plus the poses that produced it."""
    lidar_intensity: GeoRaster
    dsm: GeoRaster
    aerial: RasterGrid
    intrinsics: CameraIntrinsics
    true_pose: CameraPose
    initial_pose: CameraPose


def textured_image(width: int, height: int, seed: int = 0,
                   rectangles: Optional[int] = None) -> np.ndarray:
    """Random rectangles over smoothed noise, values in [0, 255]."""
    rng = np.random.default_rng(seed)
    base = ndimage.gaussian_filter(rng.random((height, width)), 4.0)
    base = (base - base.min()) / max(float(np.ptp(base)), 1e-12) * 120.0 + 60.0
    count = rectangles if rectangles is not None else max(8, width * height // 300)
    for _ in range(count):
        w, h = rng.integers(4, 24, size=2)
        c0 = int(rng.integers(0, max(1, width - w)))
        r0 = int(rng.integers(0, max(1, height - h)))
        base[r0:r0 + h, c0:c0 + w] = rng.uniform(0.0, 255.0)
    return np.clip(ndimage.gaussian_filter(base, 0.7), 0.0, 255.0)


def smooth_dsm(width: int, height: int, seed: int = 0, relief: float = 40.0,
               base_height: float = 100.0, hills: int = 6) -> np.ndarray:
    """Sum of Gaussian hills and hollows, heights within about +/- relief of base_height."""
    rng = np.random.default_rng(seed + 1)
    rows, cols = np.mgrid[0:height, 0:width].astype(np.float64)
    surface = np.full((height, width), base_height)
    for _ in range(hills):
        cc, rr = rng.uniform(0, width), rng.uniform(0, height)
        spread = rng.uniform(0.1, 0.25) * max(width, height)
        amplitude = rng.uniform(-relief, relief)
        surface += amplitude * np.exp(-((cols - cc) ** 2 + (rows - rr) ** 2) / (2.0 * spread ** 2))
    return surface


def remap_intensity(values: np.ndarray, noise: float = 2.0, seed: int = 0) -> np.ndarray:
    """Inverting gamma-2 remap 255 - 255 (v / 255)^2 with additive noise."""
    rng = np.random.default_rng(seed + 2)
    remapped = 255.0 - 255.0 * (np.clip(values, 0.0, 255.0) / 255.0) ** 2
    return np.clip(remapped + rng.normal(0.0, noise, values.shape), 0.0, 255.0)


def nadir_camera_for(raster: GeoRaster, altitude: float, f: float = 0.05,
                     ground_height: float = 0.0,
                     footprint: float = 1.0) -> Tuple[CameraPose, CameraIntrinsics]:
    """
    A vertical camera above the raster center with one pixel per raster cell.

    On the plane Z = ground_height each pixel covers footprint cells, so at
    footprint 1 the pixels coincide with the raster cells.
    """
    xmin, ymin, xmax, ymax = raster.bounds()
    pose = CameraPose((xmin + xmax) / 2.0, (ymin + ymax) / 2.0, ground_height + altitude, 0.0, 0.0, 0.0)
    intr = CameraIntrinsics(
        f=f,
        pixel_size=f * raster.cell_size * footprint / altitude,
        principal_col=(raster.width - 1) / 2.0,
        principal_row=(raster.height - 1) / 2.0,
        image_width=raster.width,
        image_height=raster.height,
    )
    return pose, intr


def render_aerial(texture: GeoRaster, dsm: GeoRaster, pose: CameraPose,
                  intr: CameraIntrinsics, nodata: float = AERIAL_NODATA) -> RasterGrid:
    """Image seen by a camera: texture sampled where each pixel ray meets the DSM."""
    cols, rows = np.meshgrid(np.arange(intr.image_width), np.arange(intr.image_height))
    X, Y, _, ok = intersect_dsm_many(pose, intr, cols, rows, dsm)
    values, valid = sample_bilinear_many(texture, np.where(ok, X, 0.0), np.where(ok, Y, 0.0))
    good = ok & valid
    logger.debug("Rendered %dx%d aerial image, %d pixels without ground",
                 intr.image_width, intr.image_height, int((~good).sum()))
    return RasterGrid(np.where(good, values, nodata), None)


def perturb_pose(pose: CameraPose, bias: Sequence[float]) -> CameraPose:
    return CameraPose.from_vector(pose.as_vector() + np.asarray(bias, dtype=np.float64))


def make_scene(size: int = 1024, cell_size: float = 1.0, altitude: float = 850.0,
               f: float = 0.05, footprint: float = 0.75, relief: float = 40.0,
               bias: Sequence[float] = DEFAULT_BIAS, multimodal: bool = True,
               seed: int = 0) -> SyntheticScene:
    """
    Build a LiDAR/aerial pair.

    Args:
        size: LiDAR raster side in cells
        cell_size: LiDAR cell size in meters
        altitude: Flying height above the mean terrain
        f: Focal length in meters
        footprint: Image ground footprint as a fraction of the raster side
        relief: DSM relief amplitude in meters
        bias: Pose error (meters, radians) added to the true pose
        multimodal: Apply the inverting nonlinear remap to the aerial image
        seed: Random seed

    Returns:
        SyntheticScene
    """
    base_height = 100.0
    transform = GeoTransform(500000.0, 4000000.0 + size * cell_size, cell_size, -cell_size)
    texture = GeoRaster(RasterGrid(textured_image(size, size, seed)), transform)
    dsm = GeoRaster(RasterGrid(smooth_dsm(size, size, seed, relief, base_height)), transform)

    true_pose, intr = nadir_camera_for(texture, altitude, f, base_height, footprint)
    aerial = render_aerial(texture, dsm, true_pose, intr)
    if multimodal:
        aerial = RasterGrid(remap_intensity(aerial.data, seed=seed))
    return SyntheticScene(texture, dsm, aerial, intr, true_pose, perturb_pose(true_pose, bias))
