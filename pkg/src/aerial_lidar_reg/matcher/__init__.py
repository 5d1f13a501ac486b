"""
Control point matching: 3D phase correlation of CFOG volumes, spatial
NCC and MI baselines, and the template-match scheme.
"""

from .phase_correlation import (
    CorrelationSurface,
    Peak,
    correlation_peak,
    phase_correlate,
    raised_cosine,
    subpixel_peak,
)
from .similarity import mi_map, mutual_information, ncc_map
from .template_matcher import (
    METRICS,
    MatchCandidate,
    MatchParams,
    MatchWindows,
    match_all,
    match_point,
    prepare_windows,
    run_matching,
)

__all__ = [
    "CorrelationSurface",
    "METRICS",
    "MatchCandidate",
    "MatchParams",
    "MatchWindows",
    "Peak",
    "correlation_peak",
    "match_all",
    "match_point",
    "mi_map",
    "mutual_information",
    "ncc_map",
    "phase_correlate",
    "prepare_windows",
    "raised_cosine",
    "run_matching",
    "subpixel_peak",
]
