"""
Template-match scheme for control point detection.

For every interest point the aerial image is rectified onto the LiDAR grid
around the point's predicted ground position, both windows are described
and compared. The resulting offset moves the window center onto the
matched LiDAR cell, and the control point pairs that ground position with
the aerial pixel the initial pose assigns to the window center.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from contextlib import nullcontext
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..descriptor.cfog import CfogParams, build_cfog
from ..detector.fast import InterestPoint
from ..exceptions import (
    GeometryError,
    MatchingError,
    RasterBoundsError,
    RasterError,
    RegistrationError,
)
from ..geometry.camera import CameraIntrinsics, CameraPose, image_to_ground, project_ground_to_image
from ..geometry.rectify import rectify_to_grid
from ..orientation.resection import ControlPoint
from ..raster.grid import GeoRaster, RasterGrid, sample_bilinear_many
from ..timing import StageTimer
from .phase_correlation import (
    PEAK_EXCLUSION,
    CorrelationSurface,
    correlation_peak,
    phase_correlate,
    subpixel_peak,
)
from .similarity import DEFAULT_MI_BINS, mi_map, ncc_map

logger = logging.getLogger(__name__)

METRICS = ("cfog-pc", "ncc", "mi")
MIN_TEMPLATE_SIZE = 16


@dataclass(frozen=True)
class MatchParams:
    """Template matching parameters."""
    template_size: int = 200
    search_radius: int = 50
    min_confidence: float = 1.3
    subpixel: bool = True
    metric: str = "cfog-pc"
    window: bool = False
    mi_bins: int = DEFAULT_MI_BINS
    min_valid_fraction: float = 0.5

    def __post_init__(self):
        if self.template_size < MIN_TEMPLATE_SIZE:
            raise MatchingError(
                f"template_size must be >= {MIN_TEMPLATE_SIZE}, got {self.template_size}"
            )
        if not 0 <= self.search_radius < self.template_size / 2:
            raise MatchingError(
                f"search_radius must be in [0, template_size / 2), got {self.search_radius}"
            )
        if self.min_confidence < 0:
            raise MatchingError(f"min_confidence must be >= 0, got {self.min_confidence}")
        if self.metric not in METRICS:
            raise MatchingError(f"Unknown metric '{self.metric}', expected one of {METRICS}")
        if self.mi_bins < 2:
            raise MatchingError(f"mi_bins must be >= 2, got {self.mi_bins}")
        if not 0 < self.min_valid_fraction <= 1:
            raise MatchingError(
                f"min_valid_fraction must be in (0, 1], got {self.min_valid_fraction}"
            )

    @property
    def patch_size(self) -> int:
        """Side of both matched windows."""
        return self.template_size + 2 * self.search_radius


@dataclass(frozen=True)
class MatchCandidate:
    """Outcome of matching one interest point, accepted or not."""
    index: int
    aerial_col: float
    aerial_row: float
    ground_X: float = math.nan
    ground_Y: float = math.nan
    ground_Z: float = math.nan
    offset_dx: float = math.nan
    offset_dy: float = math.nan
    peak: float = math.nan
    confidence: float = 0.0
    accepted: bool = False
    reason: str = ""

    def to_control_point(self) -> ControlPoint:
        if not self.accepted:
            raise MatchingError(f"Candidate {self.index} was rejected: {self.reason}")
        return ControlPoint(self.aerial_col, self.aerial_row,
                            self.ground_X, self.ground_Y, self.ground_Z, index=self.index)


@dataclass(frozen=True, eq=False)
class MatchWindows:
    """Co-located LiDAR and rectified aerial windows for one interest point."""
    lidar: GeoRaster
    aerial: GeoRaster
    predicted_X: float
    predicted_Y: float

    @property
    def center(self) -> Tuple[float, float]:
        """Ground coordinates of the window center."""
        return self.lidar.transform.pixel_to_world((self.lidar.width - 1) / 2.0,
                                                   (self.lidar.height - 1) / 2.0)


def matching_border(pose: CameraPose, intr: CameraIntrinsics, dsm: GeoRaster,
                    cell_size: float, params: MatchParams) -> int:
    """
    Image border, in pixels, of points whose match window would leave the image.

    The ground sample distance is taken at the highest DSM elevation, where
    it is smallest, so the border is never too narrow for a vertical view.

    Raises:
        GeometryError: If the camera is not above the DSM
    """
    valid = dsm.grid.valid_mask()
    if not valid.any():
        raise GeometryError("DSM holds no valid elevations")
    clearance = pose.Z_S - float(dsm.data[valid].max())
    if not clearance > 0:
        raise GeometryError(f"Camera at Z {pose.Z_S:.2f} is not above the DSM")
    gsd = intr.pixel_size * clearance / intr.f
    return int(math.ceil(params.patch_size * cell_size / (2.0 * gsd)))


def prepare_windows(aerial: RasterGrid, pose: CameraPose, intr: CameraIntrinsics,
                    lidar_intensity: GeoRaster, dsm: GeoRaster, pt: InterestPoint,
                    params: MatchParams) -> MatchWindows:
    """
    Cut the LiDAR window around a point's predicted ground position and
    rectify the aerial image onto the same grid.

    Near the raster edge the window slides inward so it stays whole; it
    still contains the predicted position.

    Raises:
        DsmIntersectionError: If the pixel ray misses the DSM
        RasterBoundsError: If the predicted position is off the LiDAR
            raster or the raster is smaller than the window
        GeometryError: If rectification fails
    """
    size = params.patch_size
    raster = lidar_intensity
    if raster.width < size or raster.height < size:
        raise RasterBoundsError(
            f"LiDAR raster {raster.width}x{raster.height} is smaller than the "
            f"{size}x{size} match window"
        )
    X0, Y0, _ = image_to_ground(pose, intr, pt.col, pt.row, dsm)
    col, row = raster.transform.world_to_pixel(X0, Y0)
    if not (0 <= col <= raster.width - 1 and 0 <= row <= raster.height - 1):
        raise RasterBoundsError(
            f"Predicted ground point ({X0:.2f}, {Y0:.2f}) lies outside the LiDAR raster"
        )
    col0 = min(max(int(round(col)) - size // 2, 0), raster.width - size)
    row0 = min(max(int(round(row)) - size // 2, 0), raster.height - size)
    lidar = raster.window(col0, row0, size, size)
    rectified = rectify_to_grid(aerial, pose, intr, dsm, lidar.transform, size, size)
    return MatchWindows(lidar, rectified, X0, Y0)


def _filled(raster: GeoRaster) -> Tuple[RasterGrid, float]:
    mask = raster.grid.valid_mask()
    fraction = float(mask.mean())
    if not mask.any():
        return raster.grid, 0.0
    fill = float(raster.data[mask].mean())
    return RasterGrid(np.where(mask, raster.data, fill)), fraction


def _stage(timer: Optional[StageTimer], name: str):
    return timer.stage(name) if timer is not None else nullcontext()


def _surface(aerial: RasterGrid, lidar: RasterGrid, params: MatchParams,
             cfog_params: CfogParams, timer: Optional[StageTimer] = None) -> CorrelationSurface:
    if params.metric == "cfog-pc":
        with _stage(timer, "descriptor"):
            vol_a = build_cfog(aerial, cfog_params)
            vol_b = build_cfog(lidar, cfog_params)
        with _stage(timer, "correlation"):
            return phase_correlate(vol_a, vol_b, window=params.window)
    r, t = params.search_radius, params.template_size
    template = RasterGrid(aerial.data[r:r + t, r:r + t])
    with _stage(timer, "correlation"):
        if params.metric == "ncc":
            return ncc_map(template, lidar)
        return mi_map(template, lidar, params.mi_bins)


def match_point(aerial: RasterGrid, pose: CameraPose, intr: CameraIntrinsics,
                lidar_intensity: GeoRaster, dsm: GeoRaster, pt: InterestPoint,
                params: MatchParams, cfog_params: Optional[CfogParams] = None,
                index: int = 0, timer: Optional[StageTimer] = None) -> MatchCandidate:
    """
    Match one interest point against the LiDAR intensity raster.

    Geometric and data failures produce a rejected candidate with a
    reason instead of raising.

    Args:
        aerial: Aerial image
        pose: Initial exterior orientation
        intr: Interior orientation
        lidar_intensity: LiDAR intensity raster
        dsm: Elevation raster
        pt: Interest point in aerial pixel coordinates
        params: Matching parameters
        cfog_params: Descriptor parameters for the cfog-pc metric
        index: Input position, carried into the candidate
        timer: Accumulates rectification, descriptor and correlation time

    Returns:
        MatchCandidate; accepted ones pair the aerial pixel of the window
        center with its matched ground coordinates
    """
    cfog_params = cfog_params or CfogParams()
    rejected = dict(index=index, aerial_col=float(pt.col), aerial_row=float(pt.row))

    try:
        with _stage(timer, "rectification"):
            windows = prepare_windows(aerial, pose, intr, lidar_intensity, dsm, pt, params)
    except (GeometryError, RasterError) as e:
        return MatchCandidate(**rejected, reason=str(e))

    aerial_grid, aerial_fraction = _filled(windows.aerial)
    lidar_grid, lidar_fraction = _filled(windows.lidar)
    if min(aerial_fraction, lidar_fraction) < params.min_valid_fraction:
        return MatchCandidate(
            **rejected,
            reason=f"insufficient data (aerial {aerial_fraction:.2f}, lidar {lidar_fraction:.2f})",
        )

    try:
        surface = _surface(aerial_grid, lidar_grid, params, cfog_params, timer)
        peak = correlation_peak(surface, PEAK_EXCLUSION)
        if params.subpixel and 0 < peak.col < surface.width - 1 and 0 < peak.row < surface.height - 1:
            dx, dy = subpixel_peak(surface, peak.col, peak.row)
        else:
            dx, dy = surface.offset_of(peak.col, peak.row)
    except MatchingError as e:
        return MatchCandidate(**rejected, reason=str(e))

    scored = dict(rejected, offset_dx=float(dx), offset_dy=float(dy),
                  peak=peak.value, confidence=peak.confidence)
    radius = params.search_radius
    if abs(dx) > radius or abs(dy) > radius:
        return MatchCandidate(**scored, reason=f"offset ({dx:.2f}, {dy:.2f}) beyond radius {radius}")
    if not peak.value > 0:
        return MatchCandidate(**scored, reason=f"non-positive correlation peak {peak.value:.3g}")
    if peak.confidence < params.min_confidence:
        return MatchCandidate(
            **scored, reason=f"confidence {peak.confidence:.3f} below {params.min_confidence}"
        )

    t = lidar_intensity.transform
    center_X, center_Y = windows.center
    X = center_X + dx * t.pixel_size_x
    Y = center_Y + dy * t.pixel_size_y
    (center_Z, Z), valid = sample_bilinear_many(dsm, np.array([center_X, X]),
                                                np.array([center_Y, Y]))
    if not valid.all():
        return MatchCandidate(**scored, reason="no elevation at the matched location")
    try:
        image = project_ground_to_image(pose, intr, center_X, center_Y, float(center_Z))
    except GeometryError as e:
        return MatchCandidate(**scored, reason=str(e))
    scored.update(aerial_col=image.col, aerial_row=image.row)
    return MatchCandidate(**scored, ground_X=X, ground_Y=Y, ground_Z=float(Z), accepted=True)


def match_all(aerial: RasterGrid, pose: CameraPose, intr: CameraIntrinsics,
              lidar_intensity: GeoRaster, dsm: GeoRaster, points: Sequence[InterestPoint],
              params: MatchParams, cfog_params: Optional[CfogParams] = None,
              workers: int = 1, timer: Optional[StageTimer] = None) -> List[MatchCandidate]:
    """Every candidate, in input order; workers > 1 fans out over a thread pool."""
    if workers < 1:
        raise MatchingError(f"workers must be >= 1, got {workers}")

    def run(item):
        index, pt = item
        try:
            return match_point(aerial, pose, intr, lidar_intensity, dsm, pt, params,
                               cfog_params, index=index, timer=timer)
        except RegistrationError as e:
            return MatchCandidate(index, float(pt.col), float(pt.row), reason=str(e))

    items = list(enumerate(points))
    if workers == 1:
        candidates = [run(item) for item in items]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            candidates = list(pool.map(run, items))

    accepted = sum(c.accepted for c in candidates)
    logger.info("Matched %d of %d interest points (%s)", accepted, len(candidates), params.metric)
    for c in candidates:
        if not c.accepted:
            logger.debug("Point %d rejected: %s", c.index, c.reason)
    return candidates


def run_matching(aerial: RasterGrid, pose: CameraPose, intr: CameraIntrinsics,
                 lidar_intensity: GeoRaster, dsm: GeoRaster, points: Sequence[InterestPoint],
                 params: MatchParams, cfog_params: Optional[CfogParams] = None,
                 workers: int = 1) -> List[ControlPoint]:
    """
    Match every interest point and keep the accepted ones.

    Returns:
        ControlPoints ordered by input index; may be empty
    """
    candidates = match_all(aerial, pose, intr, lidar_intensity, dsm, points,
                           params, cfog_params, workers)
    return [c.to_control_point() for c in candidates if c.accepted]
