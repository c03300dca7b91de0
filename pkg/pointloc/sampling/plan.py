"""Precomputed region centers and neighborhoods for one cloud.

FPS and ball query depend only on coordinates, never on parameters, so a plan
built once per resampled frame can be reused by every forward pass over it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from pointloc.sampling.kernels import NeighborIndex, as_points, ball_query, farthest_point_sample
from pointloc.schemas.model import SALayerConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LayerPlan:
    """FPS centers of one SA layer and their neighborhoods, one per radius."""

    center_idx: np.ndarray
    coords: np.ndarray
    neighbors: tuple[NeighborIndex, ...]
    radii: tuple[float, ...]


@dataclass(frozen=True)
class EncoderPlan:
    """Per-layer selections for the whole encoder."""

    n_input: int
    layers: tuple[LayerPlan, ...]

    def matches(self, layers: list[SALayerConfig]) -> bool:
        if len(layers) != len(self.layers):
            return False
        return all(
            plan.center_idx.shape[0] == cfg.n_points
            and plan.radii == tuple(cfg.radii)
            and all(nbr.indices.shape[1] == cfg.sample_num for nbr in plan.neighbors)
            for plan, cfg in zip(self.layers, layers, strict=True)
        )


def plan_layer(points: ArrayLike, cfg: SALayerConfig) -> LayerPlan:
    """Run FPS and one ball query per radius for a single layer."""
    pts = as_points(points)
    center_idx = farthest_point_sample(pts, cfg.n_points)
    coords = pts[center_idx]
    neighbors = tuple(ball_query(pts, coords, radius, cfg.sample_num) for radius in cfg.radii)
    return LayerPlan(
        center_idx=center_idx, coords=coords, neighbors=neighbors, radii=tuple(cfg.radii)
    )


def build_plan(points: ArrayLike, layers: list[SALayerConfig]) -> EncoderPlan:
    """
    Chain layer plans: each layer samples its centers from the previous layer's centers.

    Raises:
        EmptyNeighborhoodError: If a radius leaves some center without neighbors
    """
    pts = as_points(points)
    plans: list[LayerPlan] = []
    current = pts
    for cfg in layers:
        plan = plan_layer(current, cfg)
        plans.append(plan)
        current = plan.coords
    logger.debug(f"Built encoder plan for {pts.shape[0]} points over {len(plans)} layers")
    return EncoderPlan(n_input=pts.shape[0], layers=tuple(plans))
