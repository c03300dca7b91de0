"""Layer-wise finite-difference audit of the pose-loss gradients."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from pointloc.autodiff.gradcheck import finite_diff_check
from pointloc.autodiff.tensor import Tensor
from pointloc.data.scene import generate_scene, simulate_scan
from pointloc.data.synthetic import smooth_trajectory
from pointloc.geometry.quaternion import LogPose
from pointloc.model.network import pointloc_forward
from pointloc.model.params import ModelParams, layer_group
from pointloc.sampling.kernels import PointCloud, random_downsample
from pointloc.sampling.plan import build_plan
from pointloc.schemas.model import AttentionMode
from pointloc.training.loss import LossFactors, pose_loss

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LayerCheck:
    layer: str
    tensors: int
    coords: int
    max_rel_error: float

    def passed(self, tolerance: float) -> bool:
        return self.max_rel_error < tolerance


def gradcheck_sample(seed: int, n_points: int) -> tuple[PointCloud, LogPose]:
    """A noise-free synthetic scan and its pose, resampled to n_points."""
    scene = generate_scene(seed)
    pose = smooth_trajectory(scene, 1, seed)[0]
    cloud = simulate_scan(scene, pose, seed=[seed, 0])
    return random_downsample(cloud, n_points, seed), pose.to_log()


def check_model_gradients(
    params: ModelParams,
    cloud: PointCloud,
    target: LogPose,
    coords: int = 6,
    eps: float = 1e-5,
    seed: int = 0,
    attention: AttentionMode = "learned",
) -> list[LayerCheck]:
    """
    Compare backward-pass gradients of the pose loss with central differences.

    Up to ``coords`` randomly chosen coordinates of every parameter tensor are
    perturbed; results are grouped by layer in parameter order.
    """
    plan = build_plan(cloud.points, params.scale.sa_layers())

    def objective() -> Tensor:
        pred = pointloc_forward(params, cloud, plan=plan, attention=attention)
        return pose_loss(pred, target, LossFactors.from_params(params))

    rng = np.random.default_rng(seed)
    worst: dict[str, float] = {}
    counts: dict[str, tuple[int, int]] = {}
    for name, tensor in params.items():
        chosen = rng.choice(tensor.size, size=min(coords, tensor.size), replace=False)
        err = finite_diff_check(objective, tensor, eps, sorted(chosen.tolist()), seed)
        group = layer_group(name)
        worst[group] = max(worst.get(group, 0.0), err)
        n_tensors, n_coords = counts.get(group, (0, 0))
        counts[group] = (n_tensors + 1, n_coords + len(chosen))
        logger.debug(f"gradcheck {name}: {len(chosen)} coords, max relative error {err:.3e}")

    return [
        LayerCheck(layer=group, tensors=counts[group][0], coords=counts[group][1], max_rel_error=e)
        for group, e in worst.items()
    ]
