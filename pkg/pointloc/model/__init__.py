"""The PointLoc network, its parameters and the checkpoint format."""

from pointloc.model.checkpoint import load_checkpoint, read_checkpoint, save_checkpoint
from pointloc.model.layers import (
    FeatureSet,
    PredictedLogPose,
    attention_mask,
    group_all_forward,
    regressor_forward,
    sa_layer_forward,
    self_attention_forward,
)
from pointloc.model.network import pointloc_forward, predict
from pointloc.model.params import ModelParams, init_params

__all__ = [
    "FeatureSet",
    "ModelParams",
    "PredictedLogPose",
    "attention_mask",
    "group_all_forward",
    "init_params",
    "load_checkpoint",
    "pointloc_forward",
    "predict",
    "read_checkpoint",
    "regressor_forward",
    "sa_layer_forward",
    "save_checkpoint",
    "self_attention_forward",
]
