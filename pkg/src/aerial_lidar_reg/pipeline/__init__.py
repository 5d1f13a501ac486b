"""
Registration pipeline: configuration, orchestration, reports and visual checks.
"""

from .config import PipelineConfig, load_config
from .registration import RegistrationInputs, RegistrationPipeline
from .report import RegistrationReport, ReportGenerator, read_summary
from .visualize import (
    SurfaceResult,
    checkerboard,
    checkerboard_mask,
    similarity_surfaces,
    stretch_to_u8,
    surface_raster,
)

__all__ = [
    "PipelineConfig",
    "RegistrationInputs",
    "RegistrationPipeline",
    "RegistrationReport",
    "ReportGenerator",
    "SurfaceResult",
    "checkerboard",
    "checkerboard_mask",
    "load_config",
    "read_summary",
    "similarity_surfaces",
    "stretch_to_u8",
    "surface_raster",
]
