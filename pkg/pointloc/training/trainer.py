"""
Training loop.

Each optimizer step computes per-sample gradients on separate tapes (optionally
on worker threads), sums them in sample order, divides by the batch size and
applies one Adam update. Shuffling uses a seed derived from (seed, epoch), and
checkpoints record the finished batches of an epoch cut short by a step cap, so
a resumed run replays the uninterrupted run exactly.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import ExitStack
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from pointloc.autodiff.tensor import Tape
from pointloc.core.exceptions import (
    CheckpointError,
    ConfigError,
    DatasetIOError,
    NonFiniteError,
    TrainingDivergedError,
)
from pointloc.core.fileio import atomic_write_text
from pointloc.core.metrics import TrainingMetrics
from pointloc.data.dataset import FrameDataset
from pointloc.model.checkpoint import params_from_records, read_checkpoint, save_checkpoint
from pointloc.model.network import pointloc_forward
from pointloc.model.params import ModelParams, init_params
from pointloc.schemas.config import TrainConfig
from pointloc.schemas.model import AttentionMode
from pointloc.training.loss import LossFactors, pose_loss
from pointloc.training.optim import AdamState, adam_step

logger = logging.getLogger(__name__)

LOSS_LOG_NAME = "loss_log.tsv"
CHECKPOINT_NAME = "checkpoint.ploc"
EPOCH_RECORD = "train.epoch"
BATCH_RECORD = "train.batch"
LOSS_SUM_RECORD = "train.loss_sum"
SEEN_RECORD = "train.seen"
PROGRESS_RECORDS = (EPOCH_RECORD, BATCH_RECORD, LOSS_SUM_RECORD, SEEN_RECORD)


@dataclass(frozen=True)
class EpochLog:
    """One loss-log row: epoch, mean train loss, beta, gamma, wall-clock seconds."""

    epoch: int
    train_loss: float
    beta: float
    gamma: float
    seconds: float
    val_loss: float | None = None

    def to_line(self) -> str:
        return (
            f"{self.epoch}\t{self.train_loss!r}\t{self.beta!r}\t{self.gamma!r}\t{self.seconds:.3f}"
        )

    @classmethod
    def from_line(cls, line: str) -> EpochLog:
        fields = line.rstrip("\n").split("\t")
        if len(fields) != 5:
            raise DatasetIOError(f"Loss log line has {len(fields)} fields, expected 5: {line!r}")
        return cls(
            epoch=int(fields[0]),
            train_loss=float(fields[1]),
            beta=float(fields[2]),
            gamma=float(fields[3]),
            seconds=float(fields[4]),
        )


@dataclass
class TrainResult:
    params: ModelParams
    history: list[EpochLog]
    state: AdamState
    checkpoint: Path | None = None


def read_loss_log(path: str | Path) -> list[EpochLog]:
    text = Path(path).read_text(encoding="utf-8")
    return [EpochLog.from_line(line) for line in text.splitlines() if line.strip()]


def write_loss_log(path: str | Path, history: list[EpochLog]) -> None:
    atomic_write_text(path, "".join(entry.to_line() + "\n" for entry in history))


def sample_gradients(
    params: ModelParams, dataset: FrameDataset, index: int, attention: AttentionMode
) -> tuple[float, list[np.ndarray]]:
    """Loss and parameter gradients of one frame, recorded on its own tape."""
    frame = dataset[index]
    plan = dataset.plan(index, params.scale.sa_layers())
    with Tape() as tape:
        pred = pointloc_forward(params, frame.cloud, plan=plan, attention=attention)
        loss = pose_loss(pred, frame.target, LossFactors.from_params(params))
    return loss.item(), tape.gradients(loss, params.tensors())


def batch_gradients(
    params: ModelParams,
    dataset: FrameDataset,
    indices: list[int],
    attention: AttentionMode,
    executor: ThreadPoolExecutor | None = None,
) -> tuple[float, dict[str, np.ndarray]]:
    """Mean loss and mean gradients over a batch, summed in sample order."""
    if executor is None:
        results = [sample_gradients(params, dataset, i, attention) for i in indices]
    else:
        results = list(
            executor.map(lambda i: sample_gradients(params, dataset, i, attention), indices)
        )

    names = list(params)
    totals = [np.zeros_like(t.data) for t in params.tensors()]
    loss_sum = 0.0
    for loss_value, grads in results:
        loss_sum += loss_value
        for total, grad in zip(totals, grads, strict=True):
            total += grad
    size = float(len(indices))
    return loss_sum / size, {name: total / size for name, total in zip(names, totals, strict=True)}


def validation_loss(
    params: ModelParams,
    dataset: FrameDataset,
    attention: AttentionMode,
    executor: ThreadPoolExecutor | None = None,
) -> float:
    """Mean pose loss over a split, without recording gradients."""
    factors = LossFactors.from_params(params)

    def _one(index: int) -> float:
        frame = dataset[index]
        plan = dataset.plan(index, params.scale.sa_layers())
        pred = pointloc_forward(params, frame.cloud, plan=plan, attention=attention)
        return pose_loss(pred, frame.target, factors).item()

    indices = range(len(dataset))
    values = list(executor.map(_one, indices)) if executor else [_one(i) for i in indices]
    return float(np.mean(values))


@dataclass(frozen=True)
class RunProgress:
    """Completed epochs plus the finished batches of the next one and their loss sum."""

    epoch: int = 0
    batch: int = 0
    loss_sum: float = 0.0
    seen: int = 0

    def to_records(self) -> dict[str, np.ndarray]:
        return {
            EPOCH_RECORD: np.array([float(self.epoch)]),
            BATCH_RECORD: np.array([float(self.batch)]),
            LOSS_SUM_RECORD: np.array([self.loss_sum]),
            SEEN_RECORD: np.array([float(self.seen)]),
        }

    @classmethod
    def from_records(cls, records: dict[str, np.ndarray], source: str) -> RunProgress:
        missing = [name for name in PROGRESS_RECORDS if name not in records]
        if missing:
            raise CheckpointError(f"{source}: no {', '.join(missing)} record; cannot resume")
        return cls(
            epoch=int(records[EPOCH_RECORD][0]),
            batch=int(records[BATCH_RECORD][0]),
            loss_sum=float(records[LOSS_SUM_RECORD][0]),
            seen=int(records[SEEN_RECORD][0]),
        )

    @property
    def mark(self) -> tuple[int, int]:
        return self.epoch, self.batch


def _resume(
    path: Path, config: TrainConfig, out_dir: Path | None
) -> tuple[ModelParams, AdamState, RunProgress, list[EpochLog]]:
    records = read_checkpoint(path)
    progress = RunProgress.from_records(records, str(path))
    params = params_from_records(records, config.scale(), str(path))
    state = AdamState.from_records(records, params, config.lr)
    history: list[EpochLog] = []
    if out_dir is not None and (out_dir / LOSS_LOG_NAME).is_file():
        # A row for an unfinished epoch is rewritten once that epoch completes.
        history = [e for e in read_loss_log(out_dir / LOSS_LOG_NAME) if e.epoch <= progress.epoch]
    logger.info(
        f"Resuming from {path} after epoch {progress.epoch}, batch {progress.batch} "
        f"(step {state.step})"
    )
    return params, state, progress, history


def train(
    config: TrainConfig,
    dataset: FrameDataset,
    params: ModelParams | None = None,
    out_dir: str | Path | None = None,
    val_dataset: FrameDataset | None = None,
    resume: str | Path | None = None,
    metrics: TrainingMetrics | None = None,
) -> TrainResult:
    """
    Train with Adam on shuffled mini-batches.

    Args:
        config: Training protocol
        dataset: Training frames, resampled to the model's input size
        params: Starting parameters (fresh from ``config.seed`` when omitted)
        out_dir: Where the loss log and checkpoints go; nothing is written when omitted
        val_dataset: Frames whose mean loss is reported after every epoch
        resume: Checkpoint written by an earlier run to continue from
        metrics: Prometheus collector to update

    Raises:
        TrainingDivergedError: If a batch produces non-finite values; names the batch frames
    """
    scale = config.scale()
    if dataset.n_points != scale.n_input:
        raise ConfigError(
            f"Dataset resamples to {dataset.n_points} points, scale '{scale.name}' "
            f"expects {scale.n_input}"
        )
    out = Path(out_dir) if out_dir is not None else None

    if resume is not None:
        params, state, progress, history = _resume(Path(resume), config, out)
    else:
        if params is None:
            params = init_params(config.seed, scale)
        if params.scale != scale:
            raise ConfigError(f"Parameters were built for scale '{params.scale.name}'")
        state = AdamState.for_params(params, config.lr)
        progress, history = RunProgress(), []

    logger.info(
        f"Training scale '{scale.name}' ({params.parameter_count()} parameters) on "
        f"{len(dataset)} frames: epochs={config.epochs} batch={config.batch_size} "
        f"lr={config.lr} attention={config.attention} workers={config.workers}"
    )

    checkpoint_path = out / CHECKPOINT_NAME if out is not None else None
    saved_mark = progress.mark

    def _save() -> None:
        nonlocal saved_mark
        if checkpoint_path is None:
            return
        extra = {**progress.to_records(), **state.to_records()}
        size = save_checkpoint(checkpoint_path, params, extra)
        saved_mark = progress.mark
        logger.info(
            f"Checkpoint after epoch {progress.epoch}, batch {progress.batch} written to "
            f"{checkpoint_path} ({size} bytes)"
        )

    def _steps_exhausted() -> bool:
        return config.max_steps is not None and state.step >= config.max_steps

    with ExitStack() as stack:
        executor = None
        if config.workers > 1:
            executor = stack.enter_context(ThreadPoolExecutor(max_workers=config.workers))

        for epoch in range(progress.epoch + 1, config.epochs + 1):
            if _steps_exhausted():
                break
            started = time.perf_counter()
            order = np.random.default_rng([config.seed, epoch]).permutation(len(dataset))
            skip, loss_sum, seen = progress.batch, progress.loss_sum, progress.seen
            completed = True

            for batch, start in enumerate(range(0, len(order), config.batch_size)):
                if batch < skip:
                    continue
                if _steps_exhausted():
                    completed = False
                    break
                indices = [int(i) for i in order[start : start + config.batch_size]]
                step_started = time.perf_counter()
                batch_id = f"epoch {epoch} batch {batch} [{', '.join(dataset.frame_ids(indices))}]"
                try:
                    loss_value, grads = batch_gradients(
                        params, dataset, indices, config.attention, executor
                    )
                    adam_step(params, grads, state)
                except NonFiniteError as exc:
                    raise TrainingDivergedError(
                        batch_id, f"Training diverged in {batch_id}: {exc}"
                    ) from exc
                loss_sum += loss_value * len(indices)
                seen += len(indices)
                progress = RunProgress(epoch - 1, batch + 1, loss_sum, seen)
                if metrics is not None:
                    metrics.record_step(len(indices), time.perf_counter() - step_started)
                logger.debug(f"step {state.step}: {batch_id} loss={loss_value:.6f}")

            if seen == 0:
                break
            if completed:
                progress = RunProgress(epoch=epoch)
            val = (
                validation_loss(params, val_dataset, config.attention, executor)
                if val_dataset is not None
                else None
            )
            entry = EpochLog(
                epoch=epoch,
                train_loss=loss_sum / seen,
                beta=params.beta.item(),
                gamma=params.gamma.item(),
                seconds=time.perf_counter() - started,
                val_loss=val,
            )
            history.append(entry)
            val_text = f" val={val:.6f}" if val is not None else ""
            partial_text = "" if completed else f" (stopped after batch {progress.batch})"
            logger.info(
                f"epoch {epoch}/{config.epochs} loss={entry.train_loss:.6f}{val_text} "
                f"beta={entry.beta:.4f} gamma={entry.gamma:.4f} ({entry.seconds:.1f}s)"
                f"{partial_text}"
            )
            if metrics is not None:
                metrics.record_epoch(entry.train_loss, entry.beta, entry.gamma)
            if out is not None:
                write_loss_log(out / LOSS_LOG_NAME, history)
                if completed and epoch % config.checkpoint_every == 0:
                    _save()

    if progress.mark != saved_mark:
        _save()
    return TrainResult(params=params, history=history, state=state, checkpoint=checkpoint_path)
