"""Synthetic dataset: one scene, a smooth sensor trajectory, scans and a manifest."""

from __future__ import annotations

import logging
import math
from pathlib import Path

import numpy as np
import yaml

from pointloc.core.exceptions import DatasetIOError, InvalidArgumentError
from pointloc.core.fileio import atomic_write_text
from pointloc.data.cloud_io import save_cloud
from pointloc.data.manifest import (
    DatasetManifest,
    ManifestRecord,
    Split,
    load_manifest,
    write_manifest,
)
from pointloc.data.scene import (
    DEFAULT_AZIMUTH_STEPS,
    DEFAULT_BEAMS,
    DEFAULT_VERTICAL_FOV_DEG,
    SyntheticScene,
    generate_scene,
    simulate_scan,
)
from pointloc.geometry.quaternion import Pose, quat_from_axis_angle, quat_multiply

logger = logging.getLogger(__name__)

SENSOR_HEIGHT = 1.5
SPLIT_FRACTIONS = (0.7, 0.1, 0.2)
SEGMENTS: tuple[tuple[str, Split], ...] = (
    ("seq-00", "train"),
    ("seq-01", "val"),
    ("seq-02", "test"),
)
MANIFEST_NAME = "manifest.csv"
SCENE_NAME = "scene.yaml"
CLOUD_DIR = "clouds"


def segment_sizes(
    n_poses: int, fractions: tuple[float, float, float] = SPLIT_FRACTIONS
) -> list[int]:
    """Frames per train/val/test segment; train always keeps at least one frame."""
    train = max(1, int(round(fractions[0] * n_poses)))
    val = min(n_poses - train, int(round(fractions[1] * n_poses)))
    return [train, val, n_poses - train - val]


def smooth_trajectory(scene: SyntheticScene, n_poses: int, seed: int) -> list[Pose]:
    """
    Poses along a closed Lissajous loop at sensor height, yawing smoothly.

    Positions keep a margin from the walls and stay above every box; roll and
    pitch wobble by a few degrees.
    """
    if n_poses < 1:
        raise InvalidArgumentError(f"n_poses must be >= 1, got {n_poses}")
    rng = np.random.default_rng([seed, 1])
    lo, hi = scene.room.lo, scene.room.hi
    center = (lo + hi) / 2.0
    amplitude = (hi - lo)[:2] / 2.0 - 0.6
    phase = rng.uniform(0.0, 2.0 * math.pi, size=5)
    yaw0 = rng.uniform(-math.pi, math.pi)

    poses = []
    for s in np.linspace(0.0, 1.0, n_poses, endpoint=False):
        angle = 2.0 * math.pi * s
        position = np.array(
            [
                center[0] + amplitude[0] * math.sin(angle + phase[0]),
                center[1] + amplitude[1] * math.sin(2.0 * angle + phase[1]),
                SENSOR_HEIGHT + 0.1 * math.sin(3.0 * angle + phase[2]),
            ]
        )
        yaw = yaw0 + angle + 0.3 * math.sin(angle + phase[3])
        pitch = math.radians(5.0) * math.sin(2.0 * angle + phase[4])
        roll = math.radians(3.0) * math.cos(angle + phase[4])
        q = quat_multiply(
            quat_from_axis_angle([0, 0, 1], yaw),
            quat_multiply(
                quat_from_axis_angle([0, 1, 0], pitch), quat_from_axis_angle([1, 0, 0], roll)
            ),
        )
        poses.append(Pose.from_raw(position, q))
    return poses


def build_synthetic_dataset(
    n_poses: int,
    seed: int,
    out_dir: str | Path,
    beams: int = DEFAULT_BEAMS,
    azimuth_steps: int = DEFAULT_AZIMUTH_STEPS,
    noise_sigma: float = 0.0,
    vertical_fov_deg: float = DEFAULT_VERTICAL_FOV_DEG,
    max_range: float | None = None,
) -> DatasetManifest:
    """
    Scan one generated scene along a trajectory and write clouds plus a manifest.

    The trajectory is cut into consecutive train/val/test segments (70/10/20),
    each its own sequence. The manifest is written last, so a failed run leaves
    no manifest behind.

    Raises:
        DatasetIOError: If the output directory cannot be written
    """
    out = Path(out_dir)
    if out.exists() and not out.is_dir():
        raise DatasetIOError(f"Output path {out} exists and is not a directory")
    try:
        (out / CLOUD_DIR).mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DatasetIOError(f"Cannot create {out}: {exc}") from exc
    out = out.resolve()

    scene = generate_scene(seed)
    poses = smooth_trajectory(scene, n_poses, seed)
    labels = [
        segment
        for segment, size in zip(SEGMENTS, segment_sizes(n_poses), strict=True)
        for _ in range(size)
    ]

    records = []
    for index, (pose, (tag, split)) in enumerate(zip(poses, labels, strict=True)):
        cloud = simulate_scan(
            scene,
            pose,
            beams=beams,
            azimuth_steps=azimuth_steps,
            noise_sigma=noise_sigma,
            seed=[seed, index],
            vertical_fov_deg=vertical_fov_deg,
            max_range=max_range,
        )
        path = out / CLOUD_DIR / f"frame_{index:05d}.pcld"
        save_cloud(path, cloud)
        records.append(ManifestRecord(cloud_path=path, pose=pose, sequence_tag=tag, split=split))
        logger.debug(f"Frame {index}: {len(cloud)} points -> {path.name}")

    atomic_write_text(out / SCENE_NAME, yaml.safe_dump(scene.to_dict(), sort_keys=False))
    manifest_path = write_manifest(out / MANIFEST_NAME, records)
    logger.info(f"Synthetic dataset with {n_poses} frames written to {out}")
    return load_manifest(manifest_path)
