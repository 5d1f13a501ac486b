"""
Exception hierarchy for aerial-lidar-reg.

Every error raised by the library derives from RegistrationError. The module
specific classes also derive from ValueError so callers that only catch the
built-in exceptions keep working.
"""

from typing import Optional


class RegistrationError(Exception):
    """Base class for all library errors."""


class RasterError(RegistrationError, ValueError):
    """Invalid raster content or georeferencing."""


class RasterFormatError(RasterError):
    """Malformed raster, header, world file or point cloud on disk."""


class RasterBoundsError(RasterError):
    """A window or sample falls outside the raster extent."""


class DetectorError(RegistrationError, ValueError):
    """Interest point detection cannot run on the given input."""


class GeometryError(RegistrationError, ValueError):
    """Invalid camera model input."""


class ProjectionError(GeometryError):
    """Ground point at or behind the projection plane."""


class DsmIntersectionError(GeometryError):
    """Pixel ray cannot be intersected with the DSM."""


class DescriptorError(RegistrationError, ValueError):
    """Descriptor volume cannot be built or combined."""


class MatchingError(RegistrationError, ValueError):
    """Similarity computation failed."""


class OrientationError(RegistrationError, ValueError):
    """Resection or mismatch removal failed."""


class InsufficientPointsError(OrientationError):
    """Fewer control points than the solver needs."""


class SingularGeometryError(OrientationError):
    """Normal matrix is singular for the given control point layout."""


class DivergenceError(OrientationError):
    """Gauss-Newton iterations kept increasing the RMSE."""


class ConfigError(RegistrationError, ValueError):
    """Invalid or incomplete pipeline configuration."""


class StageError(RegistrationError):
    """Failure of one pipeline stage, wrapping the original error."""

    def __init__(self, stage: str, cause: Exception, message: Optional[str] = None):
        self.stage = stage
        self.cause = cause
        super().__init__(message or f"{stage} stage failed: {cause}")
