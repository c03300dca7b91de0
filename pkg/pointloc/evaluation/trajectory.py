"""Plain-text trajectory export: ground truth and predicted poses per frame."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from pointloc.core.exceptions import DatasetIOError, InvalidArgumentError
from pointloc.core.fileio import atomic_write_text
from pointloc.geometry.quaternion import Pose
from pointloc.schemas.report import EvalReport

logger = logging.getLogger(__name__)

TRAJECTORY_HEADER = (
    "# index gt_tx gt_ty gt_tz gt_qw gt_qx gt_qy gt_qz "
    "pred_tx pred_ty pred_tz pred_qw pred_qx pred_qy pred_qz terr_m rerr_deg"
)
_COLUMNS = 17


@dataclass(frozen=True)
class Trajectory:
    indices: list[int]
    ground_truth: list[Pose]
    predictions: list[Pose]
    translation_errors_m: list[float]
    rotation_errors_deg: list[float]

    def __len__(self) -> int:
        return len(self.indices)


def _numbers(values: np.ndarray) -> str:
    return " ".join(repr(float(v)) for v in values)


def export_trajectory(
    report: EvalReport,
    predictions: Sequence[Pose],
    ground_truth: Sequence[Pose],
    path: str | Path,
) -> Path:
    """
    Write one line per frame after a comment header.

    Raises:
        InvalidArgumentError: If the lists are empty or not aligned with the report
        DatasetIOError: If the file cannot be written
    """
    if not predictions:
        raise InvalidArgumentError("Cannot export an empty trajectory")
    if not len(predictions) == len(ground_truth) == report.frame_count:
        raise InvalidArgumentError(
            f"Trajectory lists are not aligned: {len(predictions)} predictions, "
            f"{len(ground_truth)} ground-truth poses, {report.frame_count} report frames"
        )

    lines = [TRAJECTORY_HEADER]
    for index, (gt, pred) in enumerate(zip(ground_truth, predictions, strict=True)):
        lines.append(
            f"{index} {_numbers(gt.t)} {_numbers(gt.q)} {_numbers(pred.t)} {_numbers(pred.q)} "
            f"{report.translation_errors_m[index]!r} {report.rotation_errors_deg[index]!r}"
        )
    out = Path(path)
    atomic_write_text(out, "\n".join(lines) + "\n")
    logger.info(f"Trajectory of {len(predictions)} frames written to {out}")
    return out


def load_trajectory(path: str | Path) -> Trajectory:
    """Parse a file written by export_trajectory."""
    source = Path(path)
    try:
        text = source.read_text(encoding="utf-8")
    except OSError as exc:
        raise DatasetIOError(f"Cannot read trajectory {source}: {exc}") from exc

    indices: list[int] = []
    gts: list[Pose] = []
    preds: list[Pose] = []
    terrs: list[float] = []
    rerrs: list[float] = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        fields = stripped.split()
        if len(fields) != _COLUMNS:
            raise DatasetIOError(
                f"{source}:{line_no}: expected {_COLUMNS} columns, got {len(fields)}"
            )
        try:
            values = [float(v) for v in fields[1:]]
            indices.append(int(fields[0]))
            gts.append(Pose(t=np.array(values[0:3]), q=np.array(values[3:7])))
            preds.append(Pose(t=np.array(values[7:10]), q=np.array(values[10:14])))
        except ValueError as exc:
            raise DatasetIOError(f"{source}:{line_no}: {exc}") from exc
        terrs.append(values[14])
        rerrs.append(values[15])
    return Trajectory(indices, gts, preds, terrs, rerrs)
