"""Pose loss, Adam optimizer and the training loop."""

from pointloc.training.loss import LossFactors, batch_loss, pose_loss
from pointloc.training.optim import AdamState, adam_step
from pointloc.training.trainer import EpochLog, TrainResult, read_loss_log, train

__all__ = [
    "AdamState",
    "EpochLog",
    "LossFactors",
    "TrainResult",
    "adam_step",
    "batch_loss",
    "pose_loss",
    "read_loss_log",
    "train",
]
