"""Synthetic rooms and a ray-cast spinning-LiDAR simulator."""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np
from numpy.typing import ArrayLike

from pointloc.core.exceptions import InvalidArgumentError, SceneError
from pointloc.geometry.quaternion import Pose, quat_rotate
from pointloc.sampling.kernels import PointCloud, as_points

logger = logging.getLogger(__name__)

ROOM_SIZE = (4.0, 5.0, 3.0)
MIN_BOXES = 6
MAX_BOXES = 12
MAX_BOX_HEIGHT = 1.2
DEFAULT_BEAMS = 32
DEFAULT_AZIMUTH_STEPS = 360
DEFAULT_VERTICAL_FOV_DEG = 40.0
# Range noise is a Gaussian truncated at this many standard deviations.
NOISE_CLIP_SIGMAS = 3.0


@dataclass(frozen=True)
class Box:
    """Axis-aligned box given by its min and max corners, in world meters."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self) -> None:
        lo = np.asarray(self.lo, dtype=np.float64).reshape(3).copy()
        hi = np.asarray(self.hi, dtype=np.float64).reshape(3).copy()
        if not (np.isfinite(lo).all() and np.isfinite(hi).all()) or (hi <= lo).any():
            raise SceneError(f"Degenerate box {lo.tolist()} .. {hi.tolist()}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def contains(self, points: ArrayLike, strict: bool = False) -> np.ndarray:
        p = np.atleast_2d(np.asarray(points, dtype=np.float64))
        if strict:
            return ((p > self.lo) & (p < self.hi)).all(axis=1)
        return ((p >= self.lo) & (p <= self.hi)).all(axis=1)

    def surface_distance(self, points: ArrayLike) -> np.ndarray:
        """Unsigned distance from each point to the box boundary."""
        p = np.atleast_2d(np.asarray(points, dtype=np.float64))
        outside = np.linalg.norm(np.maximum(np.maximum(self.lo - p, p - self.hi), 0.0), axis=1)
        inside = np.minimum(p - self.lo, self.hi - p).min(axis=1)
        return np.where(self.contains(p), np.maximum(inside, 0.0), outside)

    def to_dict(self) -> dict[str, list[float]]:
        return {"lo": self.lo.tolist(), "hi": self.hi.tolist()}


@dataclass(frozen=True)
class SyntheticScene:
    """A room whose six walls enclose a set of boxes standing on the floor."""

    room: Box
    boxes: tuple[Box, ...]
    seed: int | None = None

    def __post_init__(self) -> None:
        for i, box in enumerate(self.boxes):
            if (box.lo < self.room.lo).any() or (box.hi > self.room.hi).any():
                raise SceneError(f"Box {i} extends outside the room")

    @property
    def surface_count(self) -> int:
        return 6 + len(self.boxes)

    def to_dict(self) -> dict[str, Any]:
        return {
            "seed": self.seed,
            "room": self.room.to_dict(),
            "boxes": [box.to_dict() for box in self.boxes],
        }

    def check_sensor_position(self, position: ArrayLike) -> None:
        p = np.asarray(position, dtype=np.float64).reshape(1, 3)
        if not self.room.contains(p, strict=True)[0]:
            raise SceneError(f"Sensor position {p[0].tolist()} is outside the room")
        for i, box in enumerate(self.boxes):
            if box.contains(p)[0]:
                raise SceneError(f"Sensor position {p[0].tolist()} is inside box {i}")

    def distance_to_surfaces(self, points: ArrayLike) -> np.ndarray:
        """Distance from each world-frame point to the nearest wall or box face."""
        pts = as_points(points)
        best = self.room.surface_distance(pts)
        for box in self.boxes:
            best = np.minimum(best, box.surface_distance(pts))
        return best


def generate_scene(seed: int, room_size: Sequence[float] = ROOM_SIZE) -> SyntheticScene:
    """Deterministic room with 6-12 floor-standing boxes no taller than 1.2 m."""
    size = np.asarray(room_size, dtype=np.float64)
    if size.shape != (3,) or (size <= 1.0).any():
        raise InvalidArgumentError(f"Room size must be three extents above 1 m, got {room_size}")
    rng = np.random.default_rng(seed)
    count = int(rng.integers(MIN_BOXES, MAX_BOXES + 1))
    boxes = []
    for _ in range(count):
        extent = np.array(
            [rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8), rng.uniform(0.3, MAX_BOX_HEIGHT)]
        )
        lo_xy = rng.uniform(0.05, size[:2] - extent[:2] - 0.05)
        lo = np.array([lo_xy[0], lo_xy[1], 0.0])
        boxes.append(Box(lo=lo, hi=lo + extent))
    scene = SyntheticScene(room=Box(lo=np.zeros(3), hi=size), boxes=tuple(boxes), seed=seed)
    logger.debug(f"Generated scene {seed} with {count} boxes")
    return scene


def beam_directions(
    beams: int, azimuth_steps: int, vertical_fov_deg: float = DEFAULT_VERTICAL_FOV_DEG
) -> np.ndarray:
    """Unit ray directions in the sensor frame, beam-major, azimuth starting along +x."""
    if beams < 1 or azimuth_steps < 1:
        raise InvalidArgumentError("beams and azimuth_steps must be >= 1")
    half = math.radians(vertical_fov_deg) / 2.0
    elevation = np.array([0.0]) if beams == 1 else np.linspace(-half, half, beams)
    azimuth = np.arange(azimuth_steps) * (2.0 * math.pi / azimuth_steps)
    el, az = np.meshgrid(elevation, azimuth, indexing="ij")
    dirs = np.stack(
        [np.cos(el) * np.cos(az), np.cos(el) * np.sin(az), np.sin(el)], axis=-1
    ).reshape(-1, 3)
    return dirs


def _slab_entry(origin: np.ndarray, dirs: np.ndarray, box: Box) -> np.ndarray:
    """Entry distance of each ray into a box from outside; inf when it misses."""
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = (box.lo - origin) / dirs
        t2 = (box.hi - origin) / dirs
    near = np.fmax.reduce(np.fmin(t1, t2), axis=1)
    far = np.fmin.reduce(np.fmax(t1, t2), axis=1)
    hit = (near <= far) & (near > 0.0)
    return np.where(hit, near, np.inf)


def _room_exit(origin: np.ndarray, dirs: np.ndarray, room: Box) -> np.ndarray:
    """Distance to the first wall along each ray, for an origin inside the room."""
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = (room.lo - origin) / dirs
        t2 = (room.hi - origin) / dirs
    return np.fmin.reduce(np.fmax(t1, t2), axis=1)


def simulate_scan(
    scene: SyntheticScene,
    pose: Pose,
    beams: int = DEFAULT_BEAMS,
    azimuth_steps: int = DEFAULT_AZIMUTH_STEPS,
    noise_sigma: float = 0.0,
    seed: int | Sequence[int] = 0,
    vertical_fov_deg: float = DEFAULT_VERTICAL_FOV_DEG,
    max_range: float | None = None,
) -> PointCloud:
    """
    Cast beams x azimuth_steps rays from the pose and return first hits in the sensor frame.

    Rays beyond max_range are dropped. Range noise is Gaussian with standard
    deviation noise_sigma, truncated at three deviations.

    Raises:
        SceneError: If the sensor sits outside the room or inside a box
    """
    if noise_sigma < 0:
        raise InvalidArgumentError(f"noise_sigma must be >= 0, got {noise_sigma}")
    if max_range is not None and max_range <= 0:
        raise InvalidArgumentError(f"max_range must be positive, got {max_range}")
    scene.check_sensor_position(pose.t)

    local = beam_directions(beams, azimuth_steps, vertical_fov_deg)
    world = quat_rotate(pose.q, local)
    ranges = _room_exit(pose.t, world, scene.room)
    for box in scene.boxes:
        ranges = np.minimum(ranges, _slab_entry(pose.t, world, box))

    keep = np.isfinite(ranges) & (ranges > 0.0)
    if max_range is not None:
        keep &= ranges <= max_range
    if noise_sigma > 0:
        noise = np.random.default_rng(seed).standard_normal(ranges.shape[0]) * noise_sigma
        bound = NOISE_CLIP_SIGMAS * noise_sigma
        ranges = ranges + np.clip(noise, -bound, bound)
    if not keep.any():
        raise SceneError("Scan returned no points")

    points = local[keep] * ranges[keep, None]
    return PointCloud(points)
