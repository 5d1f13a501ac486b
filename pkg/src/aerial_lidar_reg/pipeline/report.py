"""
Registration report: run statistics in [summary], the pose ledger in
[pose] and per-stage wall times in [timing].
"""

from dataclasses import dataclass, field
from typing import Dict, List, Tuple

from ..utils.file_handler import parse_key_values

STAGES = ("detection", "rectification", "descriptor", "correlation", "resection", "output")


@dataclass
class RegistrationReport:
    """Outcome of one registration run."""
    metric: str
    interest_points: int
    candidates: int
    accepted: int
    cmn: int
    rmse: float
    converged: bool
    rmse_target: float
    rounds: int = 0
    running_time: float = 0.0
    stage_timings: Dict[str, float] = field(default_factory=dict)
    pose_table: List[Tuple[str, float, float, float]] = field(default_factory=list)

    @property
    def succeeded(self) -> bool:
        """Converged with at least four inliers and an RMSE under the target."""
        return self.converged and self.cmn >= 4 and self.rmse < self.rmse_target


class ReportGenerator:
    """Renders a RegistrationReport as a key/value text document."""

    def generate(self, report: RegistrationReport) -> str:
        """
        Render the report.

        Everything except the [timing] block is deterministic for identical
        inputs.

        Args:
            report: Report to render

        Returns:
            Report document
        """
        parts = [self._generate_summary(report), ""]
        parts.append(self._generate_pose(report))
        parts.append("")
        parts.append(self._generate_timing(report))
        return "\n".join(parts) + "\n"

    def _generate_summary(self, report: RegistrationReport) -> str:
        lines = [
            "[summary]",
            f"metric = {report.metric}",
            f"interest_points = {report.interest_points}",
            f"candidates = {report.candidates}",
            f"accepted = {report.accepted}",
            f"cmn = {report.cmn}",
            f"rmse_px = {report.rmse!r}",
            f"rmse_target_px = {report.rmse_target!r}",
            f"rejection_rounds = {report.rounds}",
            f"converged = {str(report.converged).lower()}",
            f"succeeded = {str(report.succeeded).lower()}",
        ]
        return "\n".join(lines)

    def _generate_pose(self, report: RegistrationReport) -> str:
        lines = ["[pose]", f"# {'element':<10} {'initial':>20} {'correction':>20} {'final':>20}"]
        for name, initial, correction, final in report.pose_table:
            lines.append(f"{name:<12} {initial:>20.6f} {correction:>20.6f} {final:>20.6f}")
        return "\n".join(lines)

    def _generate_timing(self, report: RegistrationReport) -> str:
        lines = ["[timing]"]
        for stage in STAGES:
            lines.append(f"{stage}_s = {report.stage_timings.get(stage, 0.0):.3f}")
        lines.append(f"running_time_s = {report.running_time:.3f}")
        return "\n".join(lines)


def read_summary(text: str) -> Dict[str, str]:
    """Key/value pairs of a report's [summary] block."""
    lines = text.splitlines()
    if not lines or lines[0].strip() != "[summary]":
        return {}
    return parse_key_values("\n".join(lines[1:]), "report")
