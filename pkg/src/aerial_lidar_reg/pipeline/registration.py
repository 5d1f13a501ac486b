"""
End-to-end registration of an aerial image to LiDAR rasters.

Stages: interest point detection on the aerial image, per-point
rectification and matching, mismatch removal with resection, and
artifact output. Every stage failure surfaces as a StageError naming the
stage; artifacts written before the failure stay on disk.
"""

import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Tuple

from ..detector.fast import InterestPoint, detect_partitioned
from ..exceptions import ConfigError, InsufficientPointsError, RegistrationError, StageError
from ..geometry.camera import CameraIntrinsics, CameraPose
from ..geometry.rectify import rectify_to_grid
from ..matcher.template_matcher import MatchCandidate, match_all, matching_border, prepare_windows
from ..orientation.resection import ControlPoint, ResectionResult, correction_table, reject_outliers
from ..raster.grid import GeoRaster, RasterGrid
from ..raster.rasterizer import rasterize_points
from ..timing import StageTimer
from ..utils.file_handler import REPORT_ELEMENTS, FileHandler
from ..utils.validators import InputValidator
from .config import PipelineConfig
from .report import RegistrationReport, ReportGenerator
from .visualize import checkerboard

logger = logging.getLogger(__name__)

POINT_CLOUD_EXTENSIONS = {"txt", "xyz", "pts", "asc"}


@dataclass(frozen=True, eq=False)
class RegistrationInputs:
    """Loaded pipeline inputs."""
    aerial: RasterGrid
    pose: CameraPose
    intr: CameraIntrinsics
    lidar: GeoRaster
    dsm: GeoRaster


class RegistrationPipeline:
    """Runs one registration from a PipelineConfig."""

    def __init__(self, config: PipelineConfig):
        self.config = config
        self.file_handler = FileHandler()
        self.validator = InputValidator()
        self.report_generator = ReportGenerator()
        self.timer = StageTimer()

    @property
    def output_dir(self) -> Path:
        return Path(self.config.output_dir)

    def load_inputs(self) -> RegistrationInputs:
        """
        Read and cross-check all inputs.

        A DSM given as a point cloud is rasterized on the LiDAR intensity
        cell size.

        Raises:
            ConfigError: If inputs are missing, unreadable or inconsistent
        """
        errors = self.validator.get_validation_errors(self.config)
        if errors:
            raise ConfigError("; ".join(errors))
        fh = self.file_handler
        try:
            aerial = fh.load_raster(self.config.aerial_path).grid
            pose, intr = fh.load_camera(self.config.camera_path)
            lidar = fh.load_raster(self.config.lidar_path)
            if fh.get_file_extension(self.config.dsm_path) in POINT_CLOUD_EXTENSIONS:
                points = fh.load_point_cloud(self.config.dsm_path)
                dsm = rasterize_points(points, lidar.cell_size, attribute="elevation",
                                       crs_tag=lidar.crs_tag)
            else:
                dsm = fh.load_raster(self.config.dsm_path)
        except (OSError, RegistrationError) as e:
            raise ConfigError(f"Cannot load inputs: {e}")

        errors = self.validator.get_data_errors(self.config, aerial, intr, lidar, dsm)
        if errors:
            raise ConfigError("; ".join(errors))
        logger.info("Loaded aerial %dx%d, LiDAR %dx%d at %.3f m",
                    aerial.width, aerial.height, lidar.width, lidar.height, lidar.cell_size)
        return RegistrationInputs(aerial, pose, intr, lidar, dsm)

    def detect(self, inputs: RegistrationInputs) -> List[InterestPoint]:
        """Interest points far enough inside the image for a whole match window."""
        with self.timer.stage("detection"):
            try:
                border = matching_border(inputs.pose, inputs.intr, inputs.dsm,
                                         inputs.lidar.cell_size, self.config.matcher)
                points = detect_partitioned(inputs.aerial, self.config.detector, border)
            except RegistrationError as e:
                raise StageError("detection", e)
        self.file_handler.write_interest_points(self.output_dir / "interest_points.csv", points)
        return points

    def match(self, inputs: RegistrationInputs, points: List[InterestPoint]) -> List[MatchCandidate]:
        candidates = match_all(inputs.aerial, inputs.pose, inputs.intr, inputs.lidar, inputs.dsm,
                               points, self.config.matcher, self.config.cfog,
                               workers=self.config.workers, timer=self.timer)
        if self.config.debug:
            self._dump_debug_patches(inputs, points, candidates)
        return candidates

    def orient(self, inputs: RegistrationInputs,
               candidates: List[MatchCandidate]) -> Tuple[List[ControlPoint], ResectionResult]:
        cps = [c.to_control_point() for c in candidates if c.accepted]
        with self.timer.stage("resection"):
            try:
                if len(cps) < 4:
                    raise InsufficientPointsError(
                        f"Only {len(cps)} of {len(candidates)} matches were accepted"
                    )
                return reject_outliers(cps, inputs.intr, inputs.pose,
                                       self.config.rmse_target, self.config.max_rounds)
            except RegistrationError as e:
                self.file_handler.write_matches(self.output_dir / "matches.csv", candidates)
                raise StageError("resection", e)

    def run(self) -> RegistrationReport:
        """
        Execute the whole pipeline and write its artifacts.

        Returns:
            RegistrationReport

        Raises:
            ConfigError: On configuration or input problems
            StageError: When a stage fails
        """
        start = time.perf_counter()
        inputs = self.load_inputs()
        self.output_dir.mkdir(parents=True, exist_ok=True)

        points = self.detect(inputs)
        candidates = self.match(inputs, points)
        inliers, result = self.orient(inputs, candidates)

        with self.timer.stage("output"):
            try:
                self._write_artifacts(inputs, candidates, inliers, result)
            except (OSError, RegistrationError) as e:
                raise StageError("output", e)

        report = RegistrationReport(
            metric=self.config.metric,
            interest_points=len(points),
            candidates=len(candidates),
            accepted=sum(c.accepted for c in candidates),
            cmn=len(inliers),
            rmse=result.rmse,
            converged=result.converged,
            rmse_target=self.config.rmse_target,
            rounds=result.rejection.rounds if result.rejection else 1,
            running_time=time.perf_counter() - start,
            stage_timings=self.timer.totals(),
            pose_table=[(REPORT_ELEMENTS[name], a, c, b) for name, a, c, b in correction_table(result)],
        )
        self.file_handler.write_file(self.output_dir / "report.txt",
                                     self.report_generator.generate(report))
        logger.info("Registration finished: cmn %d, rmse %.3f px", report.cmn, report.rmse)
        return report

    def _write_artifacts(self, inputs: RegistrationInputs, candidates: List[MatchCandidate],
                         inliers: List[ControlPoint], result: ResectionResult) -> None:
        fh = self.file_handler
        residuals: Dict[int, float] = {cp.index: cp.residual for cp in inliers}
        fh.write_matches(self.output_dir / "matches.csv", candidates, residuals)
        inlier_candidates = [c for c in candidates if c.index in residuals]
        fh.write_control_points(self.output_dir / "control_points.csv", inlier_candidates)
        fh.write_pose(self.output_dir / "refined_pose.txt", result.pose, inputs.intr, result)

        ortho = rectify_to_grid(inputs.aerial, result.pose, inputs.intr, inputs.dsm,
                                inputs.dsm.transform, inputs.dsm.width, inputs.dsm.height)
        fh.save_raster(ortho, self.output_dir / "registered_aerial.flt")
        mosaic, mosaic_transform = checkerboard(inputs.lidar, ortho, self.config.checkerboard_tile)
        fh.save_image_u8(mosaic, self.output_dir / "checkerboard.png")
        fh.write_world_file(mosaic_transform, self.output_dir / "checkerboard.pgw")

    def _dump_debug_patches(self, inputs: RegistrationInputs, points: List[InterestPoint],
                            candidates: List[MatchCandidate]) -> None:
        debug_dir = self.output_dir / "debug"
        for point, candidate in zip(points, candidates):
            try:
                windows = prepare_windows(inputs.aerial, inputs.pose, inputs.intr, inputs.lidar,
                                          inputs.dsm, point, self.config.matcher)
            except RegistrationError:
                continue
            stem = f"point_{candidate.index:04d}"
            self.file_handler.save_raster(windows.aerial, debug_dir / f"{stem}_aerial.flt")
            self.file_handler.save_raster(windows.lidar, debug_dir / f"{stem}_lidar.flt")
