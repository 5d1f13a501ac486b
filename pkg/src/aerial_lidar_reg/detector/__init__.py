"""
Partition-based FAST interest point detection.
"""

from .fast import (
    CIRCLE,
    DetectorParams,
    InterestPoint,
    detect_partitioned,
    fast_score,
    fast_score_map,
)

__all__ = [
    "CIRCLE",
    "DetectorParams",
    "InterestPoint",
    "detect_partitioned",
    "fast_score",
    "fast_score_map",
]
