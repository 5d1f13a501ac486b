"""
3D phase correlation of descriptor volumes and peak analysis.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy import fft

from ..descriptor.cfog import DescriptorVolume
from ..exceptions import MatchingError

SPECTRUM_FLOOR = 1e-12
PEAK_EXCLUSION = 5


@dataclass(frozen=True, eq=False)
class CorrelationSurface:
    """Similarity surface; offset (0, 0) sits at (center_col, center_row)."""
    values: np.ndarray
    center_col: int
    center_row: int

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    def offset_of(self, col: float, row: float) -> Tuple[float, float]:
        return col - self.center_col, row - self.center_row


@dataclass(frozen=True)
class Peak:
    """Integer maximum of a surface with its distinctiveness."""
    col: int
    row: int
    value: float
    confidence: float


def raised_cosine(height: int, width: int) -> np.ndarray:
    """Separable Hann window."""
    return np.outer(np.hanning(height), np.hanning(width))


def phase_correlate(volA: DescriptorVolume, volB: DescriptorVolume,
                    window: bool = False) -> CorrelationSurface:
    """
    Phase correlation of two equally sized descriptor volumes.

    The 3D spectra G (of volB) and F (of volA) give the normalized cross
    power spectrum G F* / |G F*|, whose inverse transform is an impulse at
    the translation of volB relative to volA. The z axis is summed out and
    the surface is recentered so zero offset sits at its center.

    Args:
        volA: Reference-side volume (rectified aerial patch)
        volB: Shifted volume (LiDAR intensity patch)
        window: Apply a raised-cosine window over rows and columns first

    Returns:
        CorrelationSurface with the volumes' row/column dimensions

    Raises:
        MatchingError: On shape mismatch or an all-zero volume
    """
    if volA.shape != volB.shape:
        raise MatchingError(f"Volume shapes differ: {volA.shape} vs {volB.shape}")
    a, b = volA.values, volB.values
    if not np.any(a) or not np.any(b):
        raise MatchingError("Cannot phase-correlate an all-zero volume")
    if window:
        taper = raised_cosine(volA.height, volA.width)[..., None]
        a, b = a * taper, b * taper

    # Real volumes: the half spectrum along the channel axis is enough.
    spectrum_a = fft.rfftn(a, axes=(0, 1, 2))
    spectrum_b = fft.rfftn(b, axes=(0, 1, 2))
    cross = spectrum_b * np.conj(spectrum_a)
    cross /= np.maximum(np.abs(cross), SPECTRUM_FLOOR)
    impulse = fft.irfftn(cross, s=a.shape, axes=(0, 1, 2))

    surface = fft.fftshift(impulse.sum(axis=2))
    return CorrelationSurface(surface, volA.width // 2, volA.height // 2)


def correlation_peak(surface: CorrelationSurface, exclusion: int = PEAK_EXCLUSION) -> Peak:
    """
    Locate the surface maximum and rate it against the runner-up.

    Confidence is the peak value over the highest value outside an
    exclusion x exclusion zone around the peak; 0 for non-positive peaks.
    """
    values = surface.values
    row, col = np.unravel_index(int(np.argmax(values)), values.shape)
    peak = float(values[row, col])

    half = exclusion // 2
    rest = values.copy()
    rest[max(0, row - half):row + half + 1, max(0, col - half):col + half + 1] = -np.inf
    second = float(rest.max()) if np.isfinite(rest).any() else 0.0

    if peak <= 0:
        confidence = 0.0
    else:
        confidence = peak / max(second, SPECTRUM_FLOOR)
    return Peak(int(col), int(row), peak, confidence)


def _axis_refinement(s_minus: float, s0: float, s_plus: float) -> float:
    if s_plus == s_minus:
        return 0.0
    s1, side = (s_plus, 1.0) if s_plus > s_minus else (s_minus, -1.0)
    if s0 > 0 and s1 > 0:
        delta = s1 / (s1 + s0)
    else:
        curvature = s_minus - 2.0 * s0 + s_plus
        if not curvature < 0:
            return 0.0
        delta = side * 0.5 * (s_minus - s_plus) / curvature
    # Never away from the larger neighbor, never past the midpoint.
    return side * float(np.clip(delta, 0.0, 0.5))


def subpixel_peak(surface: CorrelationSurface, peak_col: int, peak_row: int) -> Tuple[float, float]:
    """
    Sub-pixel offset of an integer peak.

    Each axis is refined on its own from the peak value s0 and the larger
    neighbor s1 with delta = s1 / (s1 + s0) when both are positive, else
    from the vertex of the parabola through the three samples. The step
    points towards the larger neighbor and is at most half a pixel.

    Returns:
        (dx, dy) offset relative to the surface center

    Raises:
        MatchingError: If the peak lies on the surface border
    """
    values = surface.values
    if not (0 < peak_col < surface.width - 1 and 0 < peak_row < surface.height - 1):
        raise MatchingError(f"Peak ({peak_col}, {peak_row}) lies on the surface border")
    s0 = float(values[peak_row, peak_col])
    delta_x = _axis_refinement(float(values[peak_row, peak_col - 1]), s0,
                               float(values[peak_row, peak_col + 1]))
    delta_y = _axis_refinement(float(values[peak_row - 1, peak_col]), s0,
                               float(values[peak_row + 1, peak_col]))
    dx, dy = surface.offset_of(peak_col, peak_row)
    return dx + delta_x, dy + delta_y
