"""
Rasterization of LiDAR point clouds into intensity and elevation layers.
"""

import logging
import math
from typing import Sequence, Union

import numpy as np
from scipy import ndimage

from ..exceptions import RasterError
from .grid import GeoRaster, GeoTransform, LidarPoint, RasterGrid

logger = logging.getLogger(__name__)

ATTRIBUTES = ("intensity", "elevation")
FILL_STRATEGIES = ("nearest", "inverse-distance")
DEFAULT_NODATA = -9999.0

PointsLike = Union[np.ndarray, Sequence[LidarPoint]]


def points_as_array(points: PointsLike) -> np.ndarray:
    """Normalise a point sequence to an (N, 4) array of x, y, z, intensity."""
    if isinstance(points, np.ndarray):
        array = np.asarray(points, dtype=np.float64)
    else:
        array = np.array([(p.x, p.y, p.z, p.intensity) for p in points], dtype=np.float64)
    if array.size == 0:
        raise RasterError("Point set is empty")
    if array.ndim != 2 or array.shape[1] != 4:
        raise RasterError(f"Expected points as (N, 4) x y z intensity, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise RasterError("Point set contains non-finite coordinates")
    return array


def rasterize_points(points: PointsLike, cell_size: float, attribute: str = "intensity",
                     fill: str = "nearest", search_radius: int = 3,
                     nodata: float = DEFAULT_NODATA, crs_tag: str = "") -> GeoRaster:
    """
    Bin points into a north-up grid covering their bounding box.

    Each cell holds the mean of the selected attribute over the points that
    fall in it. Empty cells are filled from populated cells within
    search_radius cells (nearest value or inverse-distance weighted mean),
    otherwise they are nodata.

    Args:
        points: LidarPoint sequence or (N, 4) array
        cell_size: Cell edge in meters
        attribute: "intensity" or "elevation"
        fill: "nearest" or "inverse-distance"
        search_radius: Hole-filling radius in cells (0 disables filling)
        nodata: Sentinel for cells left empty
        crs_tag: Label carried into the output raster

    Returns:
        GeoRaster with the binned attribute
    """
    if not (cell_size > 0 and math.isfinite(cell_size)):
        raise RasterError(f"Cell size must be positive, got {cell_size}")
    if attribute not in ATTRIBUTES:
        raise RasterError(f"Unknown attribute '{attribute}', expected one of {ATTRIBUTES}")
    if fill not in FILL_STRATEGIES:
        raise RasterError(f"Unknown fill strategy '{fill}', expected one of {FILL_STRATEGIES}")
    if search_radius < 0:
        raise RasterError(f"Search radius must be >= 0, got {search_radius}")

    array = points_as_array(points)
    xs, ys = array[:, 0], array[:, 1]
    values = array[:, 3] if attribute == "intensity" else array[:, 2]

    # Half-cell margin puts the extreme points on cell centers.
    origin_x = xs.min() - cell_size / 2.0
    origin_y = ys.max() + cell_size / 2.0
    cols = np.floor((xs - origin_x) / cell_size).astype(np.intp)
    rows = np.floor((origin_y - ys) / cell_size).astype(np.intp)
    width = int(cols.max()) + 1
    height = int(rows.max()) + 1

    flat = rows * width + cols
    sums = np.bincount(flat, weights=values, minlength=width * height)
    counts = np.bincount(flat, minlength=width * height)
    populated = (counts > 0).reshape(height, width)
    grid = np.full(width * height, nodata, dtype=np.float64)
    grid[counts > 0] = sums[counts > 0] / counts[counts > 0]
    grid = grid.reshape(height, width)

    holes = int((~populated).sum())
    if holes and search_radius > 0:
        grid = _fill_holes(grid, populated, fill, search_radius, nodata)
    logger.debug(
        "Rasterized %d points into %dx%d %s grid (%d empty cells before filling)",
        len(array), width, height, attribute, holes,
    )

    transform = GeoTransform(origin_x, origin_y, cell_size, -cell_size)
    return GeoRaster(RasterGrid(grid, nodata), transform, crs_tag)


def _fill_holes(grid: np.ndarray, populated: np.ndarray, fill: str,
                radius: int, nodata: float) -> np.ndarray:
    filled = grid.copy()
    holes = ~populated
    if fill == "nearest":
        distance, (near_rows, near_cols) = ndimage.distance_transform_edt(
            holes, return_indices=True
        )
        reachable = holes & (distance <= radius)
        filled[reachable] = grid[near_rows[reachable], near_cols[reachable]]
        return filled

    offsets = np.arange(-radius, radius + 1)
    dist_sq = offsets[:, None] ** 2 + offsets[None, :] ** 2
    kernel = np.zeros(dist_sq.shape, dtype=np.float64)
    inside = (dist_sq > 0) & (dist_sq <= radius * radius)
    kernel[inside] = 1.0 / dist_sq[inside]
    source = np.where(populated, grid, 0.0)
    numerator = ndimage.convolve(source, kernel, mode="constant", cval=0.0)
    denominator = ndimage.convolve(populated.astype(np.float64), kernel, mode="constant", cval=0.0)
    reachable = holes & (denominator > 0)
    filled[reachable] = numerator[reachable] / denominator[reachable]
    filled[holes & ~reachable] = nodata
    return filled
