"""
Exterior orientation refinement.
"""

from .resection import (
    ControlPoint,
    RejectionSummary,
    ResectionResult,
    compute_residuals,
    correction_table,
    reject_outliers,
    resect,
)

__all__ = [
    "ControlPoint",
    "RejectionSummary",
    "ResectionResult",
    "compute_residuals",
    "correction_table",
    "reject_outliers",
    "resect",
]
