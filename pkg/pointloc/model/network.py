"""End-to-end forward pass: encoder, attention, group-all and regressor."""

from __future__ import annotations

import logging

from pointloc.autodiff.tensor import Tensor
from pointloc.core.exceptions import DimensionError
from pointloc.geometry.quaternion import LogPose
from pointloc.model.layers import (
    FeatureSet,
    PredictedLogPose,
    group_all_forward,
    regressor_forward,
    sa_layer_forward,
    self_attention_forward,
)
from pointloc.model.params import ModelParams
from pointloc.sampling.kernels import PointCloud
from pointloc.sampling.plan import EncoderPlan, build_plan
from pointloc.schemas.model import AttentionMode

logger = logging.getLogger(__name__)

ShapeTrace = list[tuple[str, tuple[int, ...]]]


def pointloc_forward(
    params: ModelParams,
    cloud: PointCloud,
    plan: EncoderPlan | None = None,
    attention: AttentionMode = "learned",
    trace: ShapeTrace | None = None,
) -> PredictedLogPose:
    """
    Regress a log-pose from a cloud resampled to the scale's input size.

    Args:
        params: Network weights
        cloud: Sensor-frame cloud with exactly ``params.scale.n_input`` points
        plan: Precomputed FPS/ball-query selections for this cloud
        attention: Attention mode (learned, ones, off)
        trace: When given, receives (stage, shape) pairs for every intermediate output

    Raises:
        DimensionError: If the cloud size or the plan does not fit the model scale
    """
    scale = params.scale
    if len(cloud) != scale.n_input:
        raise DimensionError(
            f"Model scale '{scale.name}' expects {scale.n_input} points, got {len(cloud)}"
        )
    layers = scale.sa_layers()
    if plan is None:
        plan = build_plan(cloud.points, layers)
    elif plan.n_input != len(cloud) or not plan.matches(layers):
        raise DimensionError(f"Encoder plan does not fit model scale '{scale.name}'")

    def _note(stage: str, tensor: Tensor) -> None:
        if trace is not None:
            trace.append((stage, tensor.shape))

    if trace is not None:
        trace.append(("input", cloud.points.shape))

    source: FeatureSet | PointCloud = cloud
    for cfg, layer_plan in zip(layers, plan.layers, strict=True):
        source = sa_layer_forward(params, cfg, source, layer_plan)
        _note(cfg.name, source.feats)

    if not isinstance(source, FeatureSet):
        raise DimensionError("Model scale defines no encoder layers")
    attended = self_attention_forward(params, source, attention)
    _note("attention", attended.feats)

    embed = group_all_forward(params, attended)
    _note("group_all", embed)

    pred = regressor_forward(params, embed)
    _note("regressor.t", pred.t)
    _note("regressor.w", pred.w)
    return pred


def predict(
    params: ModelParams,
    cloud: PointCloud,
    plan: EncoderPlan | None = None,
    attention: AttentionMode = "learned",
) -> LogPose:
    """Forward pass returned as plain arrays."""
    return pointloc_forward(params, cloud, plan=plan, attention=attention).to_log_pose()
