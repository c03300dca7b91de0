"""Point selection: resampling, farthest point sampling and ball-query grouping."""

from pointloc.sampling.kernels import (
    NeighborIndex,
    PointCloud,
    as_points,
    ball_query,
    farthest_point_sample,
    group_relative,
    random_downsample,
    relative_offsets,
)
from pointloc.sampling.plan import EncoderPlan, LayerPlan, build_plan, plan_layer

__all__ = [
    "EncoderPlan",
    "LayerPlan",
    "NeighborIndex",
    "PointCloud",
    "as_points",
    "ball_query",
    "build_plan",
    "farthest_point_sample",
    "group_relative",
    "plan_layer",
    "random_downsample",
    "relative_offsets",
]
