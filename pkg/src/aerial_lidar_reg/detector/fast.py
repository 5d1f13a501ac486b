"""
FAST segment-test scoring and the grid-partition interest point detector.
"""

import logging
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from scipy import ndimage

from ..exceptions import DetectorError
from ..raster.grid import RasterGrid

logger = logging.getLogger(__name__)

# Bresenham circle of radius 3 as (dx, dy), clockwise from 12 o'clock.
CIRCLE: Tuple[Tuple[int, int], ...] = (
    (0, -3), (1, -3), (2, -2), (3, -1), (3, 0), (3, 1), (2, 2), (1, 3),
    (0, 3), (-1, 3), (-2, 2), (-3, 1), (-3, 0), (-3, -1), (-2, -2), (-1, -3),
)
RADIUS = 3


@dataclass(frozen=True)
class InterestPoint:
    """A detected pixel with its FAST score."""
    col: int
    row: int
    score: float


@dataclass(frozen=True)
class DetectorParams:
    """Parameters of the partition-based FAST detector."""
    grid_n: int = 20
    k_per_cell: int = 1
    fast_threshold: float = 20.0
    arc_length: int = 9

    def __post_init__(self):
        if self.grid_n < 1:
            raise DetectorError(f"grid_n must be >= 1, got {self.grid_n}")
        if self.k_per_cell < 1:
            raise DetectorError(f"k_per_cell must be >= 1, got {self.k_per_cell}")
        if not self.fast_threshold > 0:
            raise DetectorError(f"fast_threshold must be > 0, got {self.fast_threshold}")
        if not 9 <= self.arc_length <= len(CIRCLE):
            raise DetectorError(f"arc_length must be in [9, 16], got {self.arc_length}")


def _arc_scores(diff: np.ndarray, threshold: float, arc_length: int) -> np.ndarray:
    """
    Score candidate pixels from their circle differences.

    Args:
        diff: (16, N) circle value minus center value
        threshold: Segment-test threshold
        arc_length: Minimum contiguous arc

    Returns:
        (N,) sum of |diff| over the qualifying arc, 0 where the test fails
    """
    best = np.zeros(diff.shape[1], dtype=np.float64)
    magnitude = np.abs(diff)
    for flags in (diff > threshold, diff < -threshold):
        full = flags.all(axis=0)
        run_len = np.zeros(diff.shape[1], dtype=np.intp)
        run_sum = np.zeros(diff.shape[1], dtype=np.float64)
        # Two laps so arcs wrapping past index 15 are seen whole.
        for k in range(2 * len(CIRCLE)):
            f = flags[k % len(CIRCLE)]
            run_len = np.where(f, run_len + 1, 0)
            run_sum = np.where(f, run_sum + magnitude[k % len(CIRCLE)], 0.0)
            best = np.where(run_len >= arc_length, np.maximum(best, run_sum), best)
        best = np.where(full, magnitude.sum(axis=0), best)
    return best


def fast_score_map(grid: RasterGrid, threshold: float, arc_length: int = 9) -> np.ndarray:
    """
    FAST score of every pixel.

    Pixels closer than 3 to the border, or whose circle touches nodata,
    score 0.

    Args:
        grid: Image to score
        threshold: Intensity threshold of the segment test
        arc_length: Minimum contiguous arc

    Returns:
        Array of the grid's shape
    """
    if not threshold > 0:
        raise DetectorError(f"FAST threshold must be > 0, got {threshold}")
    data = grid.data
    h, w = data.shape
    scores = np.zeros((h, w), dtype=np.float64)
    if h < 2 * RADIUS + 1 or w < 2 * RADIUS + 1:
        return scores

    inner = (slice(RADIUS, h - RADIUS), slice(RADIUS, w - RADIUS))
    center = data[inner].ravel()
    ring = np.stack([
        data[RADIUS + dy:h - RADIUS + dy, RADIUS + dx:w - RADIUS + dx].ravel()
        for dx, dy in CIRCLE
    ])
    diff = ring - center

    # Fewer than arc_length brighter (darker) pixels cannot contain the arc.
    candidates = ((diff > threshold).sum(axis=0) >= arc_length) | \
                 ((diff < -threshold).sum(axis=0) >= arc_length)
    if grid.nodata is not None:
        footprint = ndimage.binary_erosion(
            grid.valid_mask(), structure=np.ones((2 * RADIUS + 1, 2 * RADIUS + 1)), border_value=0
        )
        candidates &= footprint[inner].ravel()

    inner_scores = np.zeros(center.shape, dtype=np.float64)
    if candidates.any():
        inner_scores[candidates] = _arc_scores(diff[:, candidates], threshold, arc_length)
    scores[inner] = inner_scores.reshape(h - 2 * RADIUS, w - 2 * RADIUS)
    return scores


def fast_score(grid: RasterGrid, col: int, row: int, threshold: float, arc_length: int = 9) -> float:
    """
    FAST score of a single pixel.

    Returns 0 when no contiguous arc of at least arc_length circle pixels is
    entirely brighter than center + threshold or entirely darker than
    center - threshold; otherwise the sum of |circle - center| over that arc.

    Raises:
        DetectorError: If the radius-3 circle does not fit around the pixel
    """
    if not threshold > 0:
        raise DetectorError(f"FAST threshold must be > 0, got {threshold}")
    if not (RADIUS <= col < grid.width - RADIUS and RADIUS <= row < grid.height - RADIUS):
        raise DetectorError(
            f"Pixel ({col}, {row}) is closer than {RADIUS} pixels to the border of a "
            f"{grid.width}x{grid.height} image"
        )
    data = grid.data
    center = data[row, col]
    diff = np.array([[data[row + dy, col + dx] - center] for dx, dy in CIRCLE])
    return float(_arc_scores(diff, threshold, arc_length)[0])


def _cell_edges(start: int, stop: int, n: int) -> List[int]:
    # Remainder pixels join the last cell.
    step = (stop - start) // n
    return [start + i * step for i in range(n)] + [stop]


def detect_partitioned(grid: RasterGrid, params: DetectorParams, border: int = 0) -> List[InterestPoint]:
    """
    Evenly distributed FAST interest points.

    The image, less a border of the given width on every side, is split
    into grid_n x grid_n disjoint cells and each cell contributes its
    k_per_cell highest strictly positive scores.

    Args:
        grid: Aerial image
        params: Detector parameters
        border: Pixels left out along each image edge

    Returns:
        Points ordered by (cell row, cell col, descending score, row, col)

    Raises:
        DetectorError: If a cell cannot hold a FAST circle
    """
    if border < 0:
        raise DetectorError(f"border must be >= 0, got {border}")
    width, height = grid.width - 2 * border, grid.height - 2 * border
    min_side = params.grid_n * (2 * RADIUS + 1)
    if width < min_side or height < min_side:
        raise DetectorError(
            f"Image {grid.width}x{grid.height} less a {border} pixel border is too small for a "
            f"{params.grid_n}x{params.grid_n} grid (needs at least {min_side} pixels per side)"
        )

    scores = fast_score_map(grid, params.fast_threshold, params.arc_length)
    col_edges = _cell_edges(border, grid.width - border, params.grid_n)
    row_edges = _cell_edges(border, grid.height - border, params.grid_n)

    points: List[InterestPoint] = []
    for r0, r1 in zip(row_edges[:-1], row_edges[1:]):
        for c0, c1 in zip(col_edges[:-1], col_edges[1:]):
            block = scores[r0:r1, c0:c1]
            rows, cols = np.nonzero(block > 0)
            if rows.size == 0:
                continue
            values = block[rows, cols]
            order = np.lexsort((cols, rows, -values))[:params.k_per_cell]
            points.extend(
                InterestPoint(int(c0 + cols[i]), int(r0 + rows[i]), float(values[i])) for i in order
            )

    logger.info(
        "Detected %d interest points on a %dx%d grid", len(points), params.grid_n, params.grid_n
    )
    return points
