"""Evaluation reports and trajectory export."""

from pointloc.evaluation.evaluator import (
    Evaluation,
    evaluate,
    pose_errors,
    report_table,
    run_evaluation,
)
from pointloc.evaluation.trajectory import Trajectory, export_trajectory, load_trajectory

__all__ = [
    "Evaluation",
    "Trajectory",
    "evaluate",
    "export_trajectory",
    "load_trajectory",
    "pose_errors",
    "report_table",
    "run_evaluation",
]
