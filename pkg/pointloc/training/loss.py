"""Pose loss with learnable translation/rotation balance factors."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

from pointloc.autodiff import ops
from pointloc.autodiff.tensor import Tensor
from pointloc.core.exceptions import DimensionError, InvalidArgumentError
from pointloc.geometry.quaternion import LogPose
from pointloc.model.layers import PredictedLogPose
from pointloc.model.params import ModelParams


@dataclass(frozen=True)
class LossFactors:
    """beta weighs the translation term, gamma the rotation term; both are learned."""

    beta: Tensor
    gamma: Tensor

    @classmethod
    def from_params(cls, params: ModelParams) -> LossFactors:
        return cls(beta=params.beta, gamma=params.gamma)

    @classmethod
    def constant(cls, beta: float, gamma: float) -> LossFactors:
        return cls(beta=Tensor([beta]), gamma=Tensor([gamma]))


def _as_prediction(pred: PredictedLogPose | LogPose) -> PredictedLogPose:
    if isinstance(pred, PredictedLogPose):
        return pred
    return PredictedLogPose(t=Tensor(pred.t), w=Tensor(pred.w))


def _weighted(residual: Tensor, factor: Tensor) -> Tensor:
    """residual * exp(-factor) + factor"""
    return ops.add(ops.mul(residual, ops.exp(ops.scale(factor, -1.0))), factor)


def pose_loss(
    pred: PredictedLogPose | LogPose, target: LogPose, factors: LossFactors
) -> Tensor:
    """
    L = |t - t_hat|_1 * exp(-beta) + beta + |w - w_hat|_1 * exp(-gamma) + gamma.

    The rotation residual compares log-quaternions directly. target must come from
    a canonical ground-truth quaternion.
    """
    pred = _as_prediction(pred)
    dt = ops.l1_distance(pred.t, Tensor(target.t))
    dw = ops.l1_distance(pred.w, Tensor(target.w))
    return ops.add(_weighted(dt, factors.beta), _weighted(dw, factors.gamma))


def batch_loss(
    preds: Sequence[PredictedLogPose | LogPose],
    targets: Sequence[LogPose],
    factors: LossFactors,
) -> Tensor:
    """Mean of the per-sample pose losses."""
    if not preds:
        raise InvalidArgumentError("batch_loss needs at least one sample")
    if len(preds) != len(targets):
        raise DimensionError(f"{len(preds)} predictions for {len(targets)} targets")
    total = pose_loss(preds[0], targets[0], factors)
    for pred, target in zip(preds[1:], targets[1:], strict=True):
        total = ops.add(total, pose_loss(pred, target, factors))
    return ops.scale(total, 1.0 / len(preds))
