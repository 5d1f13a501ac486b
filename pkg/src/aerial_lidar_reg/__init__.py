"""
aerial-lidar-reg: register perspective aerial images to LiDAR intensity rasters
with CFOG descriptors, 3D phase correlation and space resection.
"""

__version__ = "0.1.0"
__author__ = "aerial-lidar-reg Team"
__description__ = "Register aerial images to LiDAR intensity rasters"

from .main import main
from .pipeline.registration import RegistrationPipeline
from .pipeline.report import ReportGenerator

__all__ = ["main", "RegistrationPipeline", "ReportGenerator"]
