"""
Network layers: set abstraction, channel self-attention, group-all and the pose regressor.

Every layer reads its weights from a ModelParams registry by dotted name and
builds its output from the differentiable primitives, so one tape records the
whole forward pass.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from pointloc.autodiff import ops
from pointloc.autodiff.tensor import Tensor
from pointloc.core.exceptions import DimensionError, InvalidArgumentError
from pointloc.geometry.quaternion import LogPose
from pointloc.model.params import ModelParams
from pointloc.sampling.kernels import PointCloud, relative_offsets
from pointloc.sampling.plan import LayerPlan, plan_layer
from pointloc.schemas.model import LEAKY_SLOPE, AttentionMode, SALayerConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FeatureSet:
    """Region centers with one feature row per center."""

    coords: np.ndarray
    feats: Tensor

    @property
    def n_points(self) -> int:
        return int(self.coords.shape[0])

    @property
    def channels(self) -> int:
        return self.feats.shape[1]


@dataclass(frozen=True)
class PredictedLogPose:
    """Differentiable regressor output: translation and log-quaternion, three values each."""

    t: Tensor
    w: Tensor

    def to_log_pose(self) -> LogPose:
        return LogPose(t=self.t.data.copy(), w=self.w.data.copy())

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.t.data, self.w.data])


def shared_mlp(
    params: ModelParams, prefix: str, x: Tensor, depth: int, activate_last: bool = True
) -> Tensor:
    """Chain the linear layers ``{prefix}0`` .. ``{prefix}{depth-1}`` with LeakyReLU after each."""
    for i in range(depth):
        x = ops.pointwise_linear(x, params[f"{prefix}{i}.weight"], params[f"{prefix}{i}.bias"])
        if activate_last or i < depth - 1:
            x = ops.leaky_relu(x, LEAKY_SLOPE)
    return x


def sa_layer_forward(
    params: ModelParams,
    cfg: SALayerConfig,
    source: FeatureSet | PointCloud,
    plan: LayerPlan | None = None,
) -> FeatureSet:
    """
    One set-abstraction layer.

    Centers come from FPS, each radius gathers a neighborhood of relative offsets
    (plus input features), a shared MLP lifts every row and a max pool summarizes
    each neighborhood. Branches of a multi-radius layer are concatenated.
    """
    if isinstance(source, PointCloud):
        points, feats = source.points, None
        channels = 0
    else:
        points, feats = source.coords, source.feats
        channels = source.channels
    if channels != cfg.in_channels:
        raise DimensionError(
            f"{cfg.name}: expected {cfg.in_channels} input channels, got {channels}"
        )

    plan = plan or plan_layer(points, cfg)
    depth = len(cfg.mlp_channels) - 1
    branches: list[Tensor] = []
    for branch, nbr in enumerate(plan.neighbors):
        m, k = nbr.indices.shape
        grouped = Tensor(relative_offsets(points, nbr))
        if feats is not None:
            grouped = ops.concat(grouped, ops.gather_rows(feats, nbr.indices))
        rows = ops.reshape(grouped, (m * k, grouped.shape[-1]))
        lifted = shared_mlp(params, f"{cfg.name}.r{branch}.mlp", rows, depth)
        pooled, _ = ops.grouped_max_pool(
            ops.reshape(lifted, (m, k, lifted.shape[-1])), nbr.valid_counts
        )
        branches.append(pooled)

    out = branches[0]
    for extra in branches[1:]:
        out = ops.concat(out, extra)
    return FeatureSet(coords=plan.coords, feats=out)


def _pool_all(x: Tensor) -> Tensor:
    """Max over every row of an N x C tensor, as a 1 x C tensor."""
    n, c = x.shape
    pooled, _ = ops.grouped_max_pool(ops.reshape(x, (1, n, c)), np.array([n]))
    return pooled


def attention_mask(params: ModelParams, feats: Tensor) -> Tensor:
    """1 x C sigmoid mask from a linear layer over the per-channel max."""
    logits = ops.pointwise_linear(
        _pool_all(feats), params["attention.weight"], params["attention.bias"]
    )
    return ops.sigmoid(logits)


def self_attention_forward(
    params: ModelParams, source: FeatureSet, mode: AttentionMode = "learned"
) -> FeatureSet:
    """
    Gate feature channels with a mask broadcast over every point.

    ``ones`` forces the mask to 1 and ``off`` skips the module entirely.
    """
    expected = params.scale.attention_channels
    if source.channels != expected:
        raise DimensionError(
            f"attention: expected {expected} feature channels, got {source.channels}"
        )
    if mode == "off":
        return source
    if mode == "ones":
        mask = Tensor(np.ones((1, expected)))
    elif mode == "learned":
        mask = attention_mask(params, source.feats)
    else:
        raise InvalidArgumentError(f"Unknown attention mode '{mode}'")
    return FeatureSet(coords=source.coords, feats=ops.broadcast_mul_row(source.feats, mask))


def group_all_forward(params: ModelParams, source: FeatureSet) -> Tensor:
    """Pointwise MLP, max pool over all points, then a linear FC. Returns a 1-D embedding."""
    widths = params.scale.group_all_mlp
    if source.channels != widths[0]:
        raise DimensionError(
            f"group_all: expected {widths[0]} feature channels, got {source.channels}"
        )
    lifted = shared_mlp(params, "group_all.mlp", source.feats, len(widths) - 1)
    embed = ops.pointwise_linear(
        _pool_all(lifted), params["group_all.fc.weight"], params["group_all.fc.bias"]
    )
    return ops.reshape(embed, (embed.shape[1],))


def regressor_forward(params: ModelParams, embed: Tensor) -> PredictedLogPose:
    """Two independent FC stacks; the last layer of each has no activation."""
    widths = params.scale.regressor_widths
    if embed.shape != (widths[0],):
        raise DimensionError(f"regressor: expected embedding ({widths[0]},), got {embed.shape}")
    row = ops.reshape(embed, (1, widths[0]))
    branches: dict[str, Tensor] = {}
    for branch in ("t", "w"):
        out = shared_mlp(
            params, f"regressor.{branch}.fc", row, len(widths) - 1, activate_last=False
        )
        branches[branch] = ops.reshape(out, (3,))
    return PredictedLogPose(t=branches["t"], w=branches["w"])
