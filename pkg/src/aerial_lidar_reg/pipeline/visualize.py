"""
Visual checks of a registration: checkerboard mosaics and similarity
surfaces of the three matching metrics.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from ..descriptor.cfog import CfogParams, build_cfog
from ..exceptions import DescriptorError, MatchingError, RasterError
from ..matcher.phase_correlation import CorrelationSurface, correlation_peak, phase_correlate
from ..matcher.similarity import DEFAULT_MI_BINS, mi_map, ncc_map
from ..raster.grid import GeoRaster, GeoTransform, RasterGrid, sample_bilinear_many

logger = logging.getLogger(__name__)


def stretch_to_u8(values: np.ndarray, valid: Optional[np.ndarray] = None) -> np.ndarray:
    """Min-max stretch of the valid samples to 0..255; invalid samples become 0."""
    values = np.asarray(values, dtype=np.float64)
    valid = np.isfinite(values) if valid is None else valid & np.isfinite(values)
    out = np.zeros(values.shape, dtype=np.uint8)
    if not valid.any():
        return out
    lo, hi = float(values[valid].min()), float(values[valid].max())
    span = hi - lo if hi > lo else 1.0
    out[valid] = np.round((values[valid] - lo) / span * 255.0).astype(np.uint8)
    return out


def checkerboard_mask(height: int, width: int, tile: int) -> np.ndarray:
    """True where the first layer shows; the top-left tile belongs to it."""
    if tile < 1:
        raise RasterError(f"Tile size must be >= 1, got {tile}")
    rows, cols = np.indices((height, width))
    return (rows // tile + cols // tile) % 2 == 0


def _overlap_window(a: GeoRaster, b: GeoRaster) -> Tuple[int, int, int, int]:
    axmin, aymin, axmax, aymax = a.bounds()
    bxmin, bymin, bxmax, bymax = b.bounds()
    xmin, xmax = max(axmin, bxmin), min(axmax, bxmax)
    ymin, ymax = max(aymin, bymin), min(aymax, bymax)
    if xmin >= xmax or ymin >= ymax:
        raise RasterError("Rasters do not overlap")
    t = a.transform
    col0 = max(0, int(np.ceil((xmin - t.origin_x) / t.pixel_size_x - 0.5)))
    col1 = min(a.width - 1, int(np.floor((xmax - t.origin_x) / t.pixel_size_x - 0.5)))
    row0 = max(0, int(np.ceil((ymax - t.origin_y) / t.pixel_size_y - 0.5)))
    row1 = min(a.height - 1, int(np.floor((ymin - t.origin_y) / t.pixel_size_y - 0.5)))
    if col1 < col0 or row1 < row0:
        raise RasterError("Rasters do not overlap on any cell center")
    return col0, row0, col1 - col0 + 1, row1 - row0 + 1


def checkerboard(a: GeoRaster, b: GeoRaster, tile: int) -> Tuple[np.ndarray, GeoTransform]:
    """
    Alternate tile x tile blocks of two co-registered layers.

    The mosaic lives on the cells of a that fall inside b; b is resampled
    bilinearly at those cell centers. Each layer is min-max stretched on its
    own before the blocks are interleaved.

    Args:
        a: First layer, defines the output grid
        b: Second layer
        tile: Block side in output pixels

    Returns:
        Tuple of (8-bit mosaic, its geotransform)

    Raises:
        RasterError: If the layers do not overlap
    """
    col0, row0, width, height = _overlap_window(a, b)
    window = a.window(col0, row0, width, height)
    cols, rows = np.meshgrid(np.arange(width), np.arange(height))
    xs, ys = window.transform.pixel_to_world(cols, rows)
    b_values, b_valid = sample_bilinear_many(b, xs, ys)

    layer_a = stretch_to_u8(window.data, window.grid.valid_mask())
    layer_b = stretch_to_u8(b_values, b_valid)
    mosaic = np.where(checkerboard_mask(height, width, tile), layer_a, layer_b)
    logger.debug("Checkerboard %dx%d with %d px tiles", width, height, tile)
    return mosaic.astype(np.uint8), window.transform


@dataclass(frozen=True, eq=False)
class SurfaceResult:
    """Similarity surface of one metric, or the reason it could not be computed."""
    metric: str
    surface: Optional[CorrelationSurface] = None
    offset: Optional[Tuple[int, int]] = None
    confidence: float = 0.0
    error: str = ""


def surface_raster(surface: CorrelationSurface) -> GeoRaster:
    """Surface as a raster whose world coordinates are (dx, -dy) offsets."""
    transform = GeoTransform(-surface.center_col - 0.5, surface.center_row + 0.5, 1.0, -1.0)
    return GeoRaster(RasterGrid(surface.values), transform, "offset")


def similarity_surfaces(aerial_patch: RasterGrid, lidar_patch: RasterGrid,
                        metrics: Sequence[str], search_radius: int,
                        cfog_params: Optional[CfogParams] = None,
                        mi_bins: int = DEFAULT_MI_BINS) -> Dict[str, SurfaceResult]:
    """
    Compute the similarity surface of every requested metric.

    cfog-pc compares the two patches whole; ncc and mi slide the aerial
    patch minus a search_radius border over the LiDAR patch. Failures of a
    metric are recorded in its result instead of raised.
    """
    cfog_params = cfog_params or CfogParams()
    results: Dict[str, SurfaceResult] = {}
    for metric in metrics:
        try:
            if metric == "cfog-pc":
                if aerial_patch.data.shape != lidar_patch.data.shape:
                    raise MatchingError("cfog-pc needs equally sized patches")
                surface = phase_correlate(build_cfog(aerial_patch, cfog_params),
                                          build_cfog(lidar_patch, cfog_params))
            elif metric in ("ncc", "mi"):
                r = search_radius
                if not 0 <= 2 * r < min(aerial_patch.width, aerial_patch.height):
                    raise MatchingError(f"search radius {r} leaves no template")
                template = RasterGrid(aerial_patch.data[r:aerial_patch.height - r,
                                                        r:aerial_patch.width - r])
                surface = (ncc_map(template, lidar_patch) if metric == "ncc"
                           else mi_map(template, lidar_patch, mi_bins))
            else:
                raise MatchingError(f"Unknown metric '{metric}'")
            peak = correlation_peak(surface)
            dx, dy = surface.offset_of(peak.col, peak.row)
            results[metric] = SurfaceResult(metric, surface, (int(dx), int(dy)), peak.confidence)
        except (DescriptorError, MatchingError, RasterError) as e:
            logger.warning("Surface for %s not computed: %s", metric, e)
            results[metric] = SurfaceResult(metric, error=str(e))
    return results
