"""
Raster types, georeferencing and point-cloud rasterization.
"""

from .grid import (
    GeoRaster,
    GeoTransform,
    LidarPoint,
    RasterGrid,
    bilinear_at_pixels,
    extract_patch,
    pixel_to_world,
    sample_bilinear,
    sample_bilinear_many,
    world_to_pixel,
)
from .rasterizer import rasterize_points

__all__ = [
    "GeoRaster",
    "GeoTransform",
    "LidarPoint",
    "RasterGrid",
    "bilinear_at_pixels",
    "extract_patch",
    "pixel_to_world",
    "rasterize_points",
    "sample_bilinear",
    "sample_bilinear_many",
    "world_to_pixel",
]
