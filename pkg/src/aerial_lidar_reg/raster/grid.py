"""
Raster grid and georeferencing types.

Pixel convention: integer (col, row) indexes a sample, and the world
coordinate of that sample is the center of its cell, i.e. (col + 0.5,
row + 0.5) in transform space. Every module relies on this convention.
"""

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import numpy as np
from scipy import ndimage

from ..exceptions import RasterBoundsError, RasterError


ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True, eq=False)
class RasterGrid:
    """Single-band float grid, row-major, with an optional nodata sentinel."""
    data: np.ndarray
    nodata: Optional[float] = None

    def __post_init__(self):
        data = np.array(self.data, dtype=np.float64, copy=True)
        if data.ndim != 2:
            raise RasterError(f"Raster data must be 2D, got shape {data.shape}")
        if data.shape[0] < 1 or data.shape[1] < 1:
            raise RasterError(f"Raster extent must be positive, got {data.shape[1]}x{data.shape[0]}")
        nodata = None if self.nodata is None else float(self.nodata)
        object.__setattr__(self, "nodata", nodata)
        object.__setattr__(self, "data", data)
        if not np.all(np.isfinite(data[self.valid_mask()])):
            raise RasterError("Raster contains non-finite samples that are not nodata")
        data.setflags(write=False)

    @classmethod
    def from_pixels(cls, width: int, height: int, pixels, nodata: Optional[float] = None) -> "RasterGrid":
        """Build a grid from a flat row-major sample sequence."""
        flat = np.asarray(pixels, dtype=np.float64).ravel()
        if width < 1 or height < 1:
            raise RasterError(f"Raster extent must be positive, got {width}x{height}")
        if flat.size != width * height:
            raise RasterError(
                f"Pixel count {flat.size} does not match {width}x{height} = {width * height}"
            )
        return cls(flat.reshape(height, width), nodata)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def pixels(self) -> np.ndarray:
        """Row-major flat view of the samples."""
        return self.data.ravel()

    def valid_mask(self) -> np.ndarray:
        """Boolean mask of samples that are not nodata."""
        if self.nodata is None:
            return np.ones(self.data.shape, dtype=bool)
        if math.isnan(self.nodata):
            return ~np.isnan(self.data)
        return self.data != self.nodata

    def nodata_value(self) -> float:
        """Sentinel returned by samplers, NaN when the grid has none."""
        return float("nan") if self.nodata is None else self.nodata


@dataclass(frozen=True)
class GeoTransform:
    """North-up affine transform from pixel space to ground meters."""
    origin_x: float
    origin_y: float
    pixel_size_x: float
    pixel_size_y: float
    rotation_x: float = 0.0
    rotation_y: float = 0.0

    def __post_init__(self):
        values = (self.origin_x, self.origin_y, self.pixel_size_x,
                  self.pixel_size_y, self.rotation_x, self.rotation_y)
        if not all(math.isfinite(v) for v in values):
            raise RasterError(f"Geotransform terms must be finite: {values}")
        if self.pixel_size_x <= 0 or self.pixel_size_y >= 0:
            raise RasterError(
                f"Expected pixel_size_x > 0 and pixel_size_y < 0, got "
                f"({self.pixel_size_x}, {self.pixel_size_y})"
            )
        if self.rotation_x != 0 or self.rotation_y != 0:
            raise RasterError("Rotated geotransforms are not supported")

    def pixel_to_world(self, col: ArrayLike, row: ArrayLike) -> Tuple[ArrayLike, ArrayLike]:
        x = self.origin_x + (np.asarray(col, dtype=np.float64) + 0.5) * self.pixel_size_x
        y = self.origin_y + (np.asarray(row, dtype=np.float64) + 0.5) * self.pixel_size_y
        return _unwrap(x), _unwrap(y)

    def world_to_pixel(self, x: ArrayLike, y: ArrayLike) -> Tuple[ArrayLike, ArrayLike]:
        col = (np.asarray(x, dtype=np.float64) - self.origin_x) / self.pixel_size_x - 0.5
        row = (np.asarray(y, dtype=np.float64) - self.origin_y) / self.pixel_size_y - 0.5
        return _unwrap(col), _unwrap(row)

    def shifted(self, col0: int, row0: int) -> "GeoTransform":
        """Transform of a window whose first sample is (col0, row0)."""
        return GeoTransform(
            origin_x=self.origin_x + col0 * self.pixel_size_x,
            origin_y=self.origin_y + row0 * self.pixel_size_y,
            pixel_size_x=self.pixel_size_x,
            pixel_size_y=self.pixel_size_y,
        )

    def as_tuple(self) -> Tuple[float, float, float, float, float, float]:
        return (self.origin_x, self.origin_y, self.pixel_size_x,
                self.pixel_size_y, self.rotation_x, self.rotation_y)


@dataclass(frozen=True, eq=False)
class GeoRaster:
    """Georeferenced raster: grid, transform and an opaque CRS label."""
    grid: RasterGrid
    transform: GeoTransform
    crs_tag: str = ""

    @property
    def width(self) -> int:
        return self.grid.width

    @property
    def height(self) -> int:
        return self.grid.height

    @property
    def data(self) -> np.ndarray:
        return self.grid.data

    @property
    def nodata(self) -> Optional[float]:
        return self.grid.nodata

    @property
    def cell_size(self) -> float:
        return self.transform.pixel_size_x

    def bounds(self) -> Tuple[float, float, float, float]:
        """(xmin, ymin, xmax, ymax) of the outer cell edges."""
        t = self.transform
        xmax = t.origin_x + self.width * t.pixel_size_x
        ymin = t.origin_y + self.height * t.pixel_size_y
        return (t.origin_x, ymin, xmax, t.origin_y)

    def window(self, col0: int, row0: int, width: int, height: int) -> "GeoRaster":
        """Georeferenced sub-raster starting at (col0, row0)."""
        if col0 < 0 or row0 < 0 or col0 + width > self.width or row0 + height > self.height:
            raise RasterBoundsError(
                f"Window ({col0}, {row0}, {width}x{height}) exceeds raster "
                f"{self.width}x{self.height}"
            )
        data = self.data[row0:row0 + height, col0:col0 + width]
        return GeoRaster(RasterGrid(data, self.nodata), self.transform.shifted(col0, row0), self.crs_tag)


@dataclass(frozen=True)
class LidarPoint:
    """One LiDAR return."""
    x: float
    y: float
    z: float
    intensity: float = field(default=0.0)

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.z, self.intensity)):
            raise RasterError(f"LiDAR point has non-finite values: {self}")
        if self.intensity < 0:
            raise RasterError(f"LiDAR intensity must be >= 0, got {self.intensity}")


def _unwrap(value: np.ndarray) -> ArrayLike:
    return float(value) if np.ndim(value) == 0 else value


def pixel_to_world(t: GeoTransform, col: ArrayLike, row: ArrayLike) -> Tuple[ArrayLike, ArrayLike]:
    """Ground coordinates of pixel centers."""
    return t.pixel_to_world(col, row)


def world_to_pixel(t: GeoTransform, x: ArrayLike, y: ArrayLike) -> Tuple[ArrayLike, ArrayLike]:
    """Fractional pixel coordinates of ground points (inverse of pixel_to_world)."""
    return t.world_to_pixel(x, y)


def bilinear_at_pixels(grid: RasterGrid, cols, rows) -> Tuple[np.ndarray, np.ndarray]:
    """
    Bilinear samples of a grid at fractional pixel coordinates.

    A sample is invalid when it lies outside the sample lattice or when any
    of its four neighbors is nodata.

    Args:
        grid: Grid to sample
        cols: Fractional column coordinates
        rows: Fractional row coordinates

    Returns:
        Tuple of (values, valid); invalid values hold the grid's nodata value
    """
    cols = np.asarray(cols, dtype=np.float64)
    rows = np.asarray(rows, dtype=np.float64)
    cols, rows = np.broadcast_arrays(cols, rows)
    h, w = grid.height, grid.width

    inside = (np.isfinite(cols) & np.isfinite(rows)
              & (cols >= 0) & (cols <= w - 1) & (rows >= 0) & (rows <= h - 1))
    safe_cols = np.where(inside, cols, 0.0)
    safe_rows = np.where(inside, rows, 0.0)

    c0 = np.clip(np.floor(safe_cols).astype(np.intp), 0, max(w - 2, 0))
    r0 = np.clip(np.floor(safe_rows).astype(np.intp), 0, max(h - 2, 0))
    c1 = np.minimum(c0 + 1, w - 1)
    r1 = np.minimum(r0 + 1, h - 1)

    mask = grid.valid_mask()
    valid = inside & mask[r0, c0] & mask[r0, c1] & mask[r1, c0] & mask[r1, c1]

    filled = np.where(mask, grid.data, 0.0)
    values = ndimage.map_coordinates(
        filled, [safe_rows.ravel(), safe_cols.ravel()], order=1, mode="nearest"
    ).reshape(cols.shape)
    values = np.where(valid, values, grid.nodata_value())
    return values, valid


def sample_bilinear_many(raster: GeoRaster, xs, ys) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorised sample_bilinear; returns (values, valid)."""
    cols, rows = raster.transform.world_to_pixel(xs, ys)
    return bilinear_at_pixels(raster.grid, cols, rows)


def sample_bilinear(raster: GeoRaster, x: float, y: float) -> float:
    """
    Bilinear interpolation of a raster at a ground position.

    Args:
        raster: Raster to sample
        x: Ground x in meters
        y: Ground y in meters

    Returns:
        Interpolated value, or the raster's nodata (NaN when it has none)
        outside the grid or next to a nodata sample
    """
    values, _ = sample_bilinear_many(raster, np.array([x]), np.array([y]))
    return float(values[0])


def extract_patch(raster: Union[GeoRaster, RasterGrid], center_col: int,
                  center_row: int, size: int) -> RasterGrid:
    """
    Cut a size x size window centered at a pixel.

    The window starts at center - size // 2, so even sizes place the center
    pixel just right of and below the geometric middle.

    Raises:
        RasterBoundsError: If the window leaves the raster
    """
    if size < 1:
        raise RasterError(f"Patch size must be positive, got {size}")
    grid = raster.grid if isinstance(raster, GeoRaster) else raster
    col0 = int(center_col) - size // 2
    row0 = int(center_row) - size // 2
    if col0 < 0 or row0 < 0 or col0 + size > grid.width or row0 + size > grid.height:
        raise RasterBoundsError(
            f"Patch of size {size} at ({center_col}, {center_row}) exceeds raster "
            f"{grid.width}x{grid.height}"
        )
    return RasterGrid(grid.data[row0:row0 + size, col0:col0 + size], grid.nodata)
