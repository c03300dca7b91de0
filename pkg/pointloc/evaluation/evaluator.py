"""Pose error evaluation over a manifest split."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from rich.table import Table

from pointloc.core.config import get_settings
from pointloc.core.metrics import TrainingMetrics
from pointloc.data.dataset import FrameDataset
from pointloc.data.manifest import DatasetManifest
from pointloc.geometry.quaternion import Pose, rotation_error_deg, translation_error_m
from pointloc.model.network import predict
from pointloc.model.params import ModelParams
from pointloc.schemas.config import Aggregate
from pointloc.schemas.model import AttentionMode
from pointloc.schemas.report import EvalReport

logger = logging.getLogger(__name__)


@dataclass
class Evaluation:
    """Report plus the per-frame poses behind it, in split order."""

    report: EvalReport
    predictions: list[Pose] = field(default_factory=list)
    ground_truth: list[Pose] = field(default_factory=list)


def pose_errors(ground_truth: Pose, prediction: Pose) -> tuple[float, float]:
    """(translation error in metres, rotation error in degrees)."""
    return (
        translation_error_m(ground_truth.t, prediction.t),
        rotation_error_deg(ground_truth.q, prediction.q),
    )


def run_evaluation(
    params: ModelParams,
    manifest: DatasetManifest,
    split: str = "test",
    aggregate: Aggregate = "median",
    seed: int | None = None,
    attention: AttentionMode = "learned",
    workers: int = 1,
    metrics: TrainingMetrics | None = None,
) -> Evaluation:
    """
    Predict every frame of a split and compare against its ground-truth pose.

    Clouds are resampled with ``seed`` (the settings' evaluation seed by default), so
    the same checkpoint, manifest and seed always give the same report.

    Raises:
        EmptySplitError: If the split has no frames
    """
    seed = get_settings().eval_seed if seed is None else seed
    dataset = FrameDataset(manifest, split, params.scale.n_input, seed=seed, cache=False)
    logger.info(f"Evaluating {len(dataset)} '{split}' frames (seed {seed}, attention={attention})")

    def _one(index: int) -> tuple[Pose, Pose]:
        frame = dataset[index]
        estimate = predict(params, frame.cloud, attention=attention).to_pose(strict=False)
        return frame.pose, estimate

    indices = range(len(dataset))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            pairs = list(executor.map(_one, indices))
    else:
        pairs = [_one(i) for i in indices]

    ground_truth = [gt for gt, _ in pairs]
    predictions = [pred for _, pred in pairs]
    errors = [pose_errors(gt, pred) for gt, pred in pairs]
    report = EvalReport.from_errors(
        split,
        dataset.frame_ids(list(indices)),
        [t for t, _ in errors],
        [r for _, r in errors],
        aggregate,
    )
    logger.info(
        f"{split}: median {report.median_translation_m:.4f} m / "
        f"{report.median_rotation_deg:.3f} deg, mean {report.mean_translation_m:.4f} m / "
        f"{report.mean_rotation_deg:.3f} deg over {report.frame_count} frames"
    )
    if metrics is not None:
        metrics.record_evaluation(
            report.mean_translation_m,
            report.median_translation_m,
            report.mean_rotation_deg,
            report.median_rotation_deg,
        )
    return Evaluation(report=report, predictions=predictions, ground_truth=ground_truth)


def evaluate(
    params: ModelParams,
    manifest: DatasetManifest,
    split: str = "test",
    aggregate: Aggregate = "median",
    seed: int | None = None,
    attention: AttentionMode = "learned",
    workers: int = 1,
) -> EvalReport:
    return run_evaluation(params, manifest, split, aggregate, seed, attention, workers).report


def report_table(report: EvalReport) -> Table:
    """Human summary; the requested aggregate is highlighted."""
    table = Table(title=f"Pose error on '{report.split}' ({report.frame_count} frames)")
    table.add_column("Aggregate", style="cyan")
    table.add_column("Translation (m)", justify="right")
    table.add_column("Rotation (deg)", justify="right")
    rows = [
        ("mean", report.mean_translation_m, report.mean_rotation_deg),
        ("median", report.median_translation_m, report.median_rotation_deg),
    ]
    for name, t, r in rows:
        style = "bold green" if name == report.aggregate else None
        table.add_row(name, f"{t:.4f}", f"{r:.3f}", style=style)
    return table
