"""
Dense structural descriptor (CFOG).
"""

from .cfog import (
    CfogParams,
    DescriptorVolume,
    build_cfog,
    gradients,
    normalize_pixels,
    oriented_channels,
    smooth_volume,
)

__all__ = [
    "CfogParams",
    "DescriptorVolume",
    "build_cfog",
    "gradients",
    "normalize_pixels",
    "oriented_channels",
    "smooth_volume",
]
