"""
Channel Feature of Oriented Gradients (CFOG).

A dense descriptor: for every pixel, m absolute oriented gradients at
orientations i * 180 / m degrees, smoothed by a Gaussian in X/Y and a
(1, 2, 1) kernel across the periodic orientation axis.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from ..exceptions import DescriptorError
from ..raster.grid import RasterGrid

logger = logging.getLogger(__name__)

Z_KERNEL = np.array([1.0, 2.0, 1.0]) / 4.0
NORM_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class DescriptorVolume:
    """Per-pixel feature volume indexed (row, col, channel)."""
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 3:
            raise DescriptorError(f"Descriptor volume must be 3D, got shape {values.shape}")
        object.__setattr__(self, "values", values)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def m(self) -> int:
        return self.values.shape[2]

    @property
    def shape(self):
        return self.values.shape


@dataclass(frozen=True)
class CfogParams:
    """CFOG construction parameters."""
    m: int = 9
    sigma: float = 0.8
    normalize_per_pixel: bool = True

    def __post_init__(self):
        if self.m < 2:
            raise DescriptorError(f"Channel count m must be >= 2, got {self.m}")
        if not self.sigma > 0:
            raise DescriptorError(f"sigma must be > 0, got {self.sigma}")


def gradients(grid: RasterGrid):
    """
    Sobel derivatives with edge replication.

    Returns:
        Tuple of (gx, gy); gx grows with columns, gy with rows
    """
    if grid.width < 3 or grid.height < 3:
        raise DescriptorError(f"Gradients need at least 3x3 pixels, got {grid.width}x{grid.height}")
    gx = ndimage.sobel(grid.data, axis=1, mode="nearest")
    gy = ndimage.sobel(grid.data, axis=0, mode="nearest")
    return gx, gy


def oriented_channels(gx: np.ndarray, gy: np.ndarray, m: int) -> DescriptorVolume:
    """Channel i holds |cos(theta_i) * gx + sin(theta_i) * gy|, theta_i = i * pi / m."""
    gx = np.asarray(gx, dtype=np.float64)
    gy = np.asarray(gy, dtype=np.float64)
    if gx.shape != gy.shape:
        raise DescriptorError(f"Gradient shapes differ: {gx.shape} vs {gy.shape}")
    if m < 2:
        raise DescriptorError(f"Channel count m must be >= 2, got {m}")
    thetas = np.arange(m) * math.pi / m
    channels = np.abs(
        gx[..., None] * np.cos(thetas) + gy[..., None] * np.sin(thetas)
    )
    return DescriptorVolume(channels)


def smooth_volume(vol: DescriptorVolume, sigma: float) -> DescriptorVolume:
    """
    Separable 3D smoothing of a descriptor volume.

    A normalized Gaussian of radius ceil(3 sigma) runs along X then Y with
    edge replication; the (1, 2, 1) / 4 kernel then runs circularly along
    the channel axis.
    """
    if not sigma > 0:
        raise DescriptorError(f"sigma must be > 0, got {sigma}")
    radius = int(math.ceil(3.0 * sigma))
    values = ndimage.gaussian_filter1d(vol.values, sigma, axis=1, mode="nearest", radius=radius)
    values = ndimage.gaussian_filter1d(values, sigma, axis=0, mode="nearest", radius=radius)
    values = ndimage.correlate1d(values, Z_KERNEL, axis=2, mode="wrap")
    return DescriptorVolume(values)


def normalize_pixels(vol: DescriptorVolume) -> DescriptorVolume:
    """Scale each pixel's channel vector to unit L2 norm; flat pixels stay zero."""
    norms = np.linalg.norm(vol.values, axis=2, keepdims=True)
    safe = np.where(norms > NORM_FLOOR, norms, 1.0)
    return DescriptorVolume(np.where(norms > NORM_FLOOR, vol.values / safe, 0.0))


def build_cfog(grid: RasterGrid, params: CfogParams = CfogParams()) -> DescriptorVolume:
    """
    Build the CFOG volume of an image.

    Args:
        grid: Image, at least 3x3
        params: Channel count, smoothing and normalization switches

    Returns:
        Non-negative (height, width, m) volume
    """
    gx, gy = gradients(grid)
    volume = smooth_volume(oriented_channels(gx, gy, params.m), params.sigma)
    if params.normalize_per_pixel:
        volume = normalize_pixels(volume)
    return volume
