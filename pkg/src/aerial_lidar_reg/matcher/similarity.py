"""
Spatial-domain similarity baselines: normalized cross-correlation and
mutual information, evaluated at every placement of a template in a
search image.
"""

import logging

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.stats import entropy

from ..exceptions import MatchingError
from ..raster.grid import RasterGrid
from .phase_correlation import CorrelationSurface

logger = logging.getLogger(__name__)

DEFAULT_MI_BINS = 32
VARIANCE_FLOOR = 1e-12


def _check_sizes(template: RasterGrid, search: RasterGrid) -> None:
    if search.width < template.width or search.height < template.height:
        raise MatchingError(
            f"Search {search.width}x{search.height} is smaller than template "
            f"{template.width}x{template.height}"
        )


def _centered(values: np.ndarray, template: RasterGrid, search: RasterGrid) -> CorrelationSurface:
    return CorrelationSurface(
        values,
        (search.width - template.width) // 2,
        (search.height - template.height) // 2,
    )


def ncc_map(template: RasterGrid, search: RasterGrid) -> CorrelationSurface:
    """
    Normalized cross-correlation coefficient at every placement.

    Surface cell (i, j) scores the window of search whose top-left sample is
    (j, i); zero offset is the placement that centers the template. Windows
    without variance score 0.

    Raises:
        MatchingError: If the template has zero variance or does not fit
    """
    _check_sizes(template, search)
    t = template.data
    if np.ptp(t) == 0:
        raise MatchingError("NCC template has zero variance")
    t_zero = t - t.mean()
    t_norm = float(np.sqrt(np.sum(t_zero * t_zero)))

    windows = sliding_window_view(search.data, t.shape)
    out = np.empty(windows.shape[:2])
    scale = VARIANCE_FLOOR * max(1.0, float(np.abs(search.data).max())) * np.sqrt(t.size)
    for i in range(windows.shape[0]):
        row = windows[i]
        w_zero = row - row.mean(axis=(1, 2), keepdims=True)
        numerator = np.einsum("jkl,kl->j", w_zero, t_zero)
        w_norm = np.sqrt(np.einsum("jkl,jkl->j", w_zero, w_zero))
        flat = w_norm <= scale
        out[i] = np.where(flat, 0.0, numerator / (np.where(flat, 1.0, w_norm) * t_norm))
    return _centered(np.clip(out, -1.0, 1.0), template, search)


def _rank_bins(values: np.ndarray, bins: int) -> np.ndarray:
    """
    Bin index of every sample along the last axis.

    Samples are ranked among the distinct values of their row and the
    ranks are spread evenly over the bins, so equal values share a bin and
    any strictly increasing remap leaves the indices unchanged.
    """
    order = np.argsort(values, axis=-1)
    ordered = np.take_along_axis(values, order, axis=-1)
    steps = np.cumsum(np.diff(ordered, axis=-1) > 0, axis=-1)
    dense = np.concatenate([np.zeros(steps.shape[:-1] + (1,), dtype=steps.dtype), steps], axis=-1)
    ranks = np.empty_like(dense)
    np.put_along_axis(ranks, order, dense, axis=-1)
    return ranks * bins // (dense[..., -1:] + 1)


def _mutual_information_stack(joint_counts: np.ndarray) -> np.ndarray:
    # Miller-Madow: each entropy gains (occupied bins - 1) / 2N.
    flat = joint_counts.reshape(len(joint_counts), -1)
    rows, cols = joint_counts.sum(axis=2), joint_counts.sum(axis=1)
    plug_in = entropy(rows, axis=1) + entropy(cols, axis=1) - entropy(flat, axis=1)
    occupied = (np.count_nonzero(rows, axis=1) + np.count_nonzero(cols, axis=1)
                - np.count_nonzero(flat, axis=1) - 1)
    return np.maximum(0.0, plug_in + occupied / (2.0 * flat.sum(axis=1)))


def mutual_information(joint_counts: np.ndarray) -> float:
    """
    I(X; Y) in nats from a joint histogram, H(X) + H(Y) - H(X, Y).

    Every entropy carries the Miller-Madow correction, so independent
    samples score close to 0 and I(X; X) equals the corrected H(X).
    """
    joint = np.asarray(joint_counts, dtype=np.float64)
    return float(_mutual_information_stack(joint[None])[0])


def mi_map(template: RasterGrid, search: RasterGrid, bins: int = DEFAULT_MI_BINS) -> CorrelationSurface:
    """
    Mutual information at every placement.

    Template and window are each quantized by the rank of their values, so
    the score is unchanged by any strictly monotone remapping of either
    side's intensities. Single-valued windows score 0.

    Args:
        template: Template image
        search: Search image, at least as large as template
        bins: Histogram bins per side, >= 2

    Raises:
        MatchingError: On too few bins or single-valued inputs
    """
    _check_sizes(template, search)
    if bins < 2:
        raise MatchingError(f"MI needs at least 2 bins, got {bins}")
    if np.ptp(template.data) == 0 or np.ptp(search.data) == 0:
        raise MatchingError("MI inputs must not be single-valued")

    t_bins = _rank_bins(template.data.ravel(), bins) * bins
    windows = sliding_window_view(search.data, template.data.shape)
    placements = windows.shape[1]
    # One bincount per surface row: each placement owns a bins x bins block.
    blocks = np.arange(placements)[:, None] * (bins * bins)
    out = np.zeros(windows.shape[:2])
    for i in range(windows.shape[0]):
        flat = windows[i].reshape(placements, -1)
        codes = blocks + t_bins + _rank_bins(flat, bins)
        joint = np.bincount(codes.ravel(), minlength=placements * bins * bins)
        out[i] = _mutual_information_stack(joint.reshape(placements, bins, bins))
        out[i, np.ptp(flat, axis=1) == 0] = 0.0
    return _centered(out, template, search)
