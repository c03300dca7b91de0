"""Per-frame access to a manifest split: resampled clouds and regression targets."""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass

import numpy as np

from pointloc.core.exceptions import EmptySplitError
from pointloc.data.cloud_io import load_cloud
from pointloc.data.manifest import DatasetManifest, ManifestRecord
from pointloc.geometry.quaternion import LogPose, Pose
from pointloc.sampling.kernels import PointCloud, random_downsample
from pointloc.sampling.plan import EncoderPlan, build_plan
from pointloc.schemas.model import SALayerConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Frame:
    index: int
    record: ManifestRecord
    cloud: PointCloud
    target: LogPose

    @property
    def frame_id(self) -> str:
        return self.record.frame_id

    @property
    def pose(self) -> Pose:
        return self.record.pose


def frame_seed(base_seed: int, index: int) -> int:
    """Resampling seed of one frame, independent of which other frames are loaded."""
    return int(np.random.SeedSequence([base_seed, index]).generate_state(1)[0])


class FrameDataset:
    """
    Frames of one split, resampled to a fixed point count.

    Loaded frames and their encoder plans are cached; both depend only on the
    frame and the seed, so repeated epochs reuse them.
    """

    def __init__(
        self,
        manifest: DatasetManifest,
        split: str,
        n_points: int,
        seed: int = 0,
        cache: bool = True,
    ) -> None:
        self.records = manifest.split(split)
        if not self.records:
            raise EmptySplitError(f"Split '{split}' has no frames")
        self.split = split
        self.n_points = n_points
        self.seed = seed
        self.cache = cache
        self._frames: dict[int, Frame] = {}
        self._plans: dict[int, EncoderPlan] = {}
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self.records)

    def __getitem__(self, index: int) -> Frame:
        if not 0 <= index < len(self.records):
            raise IndexError(f"Frame {index} out of range for {len(self.records)} frames")
        cached = self._frames.get(index)
        if cached is not None:
            return cached
        record = self.records[index]
        cloud = random_downsample(
            load_cloud(record.cloud_path), self.n_points, frame_seed(self.seed, index)
        )
        frame = Frame(index=index, record=record, cloud=cloud, target=record.pose.to_log())
        if self.cache:
            with self._lock:
                self._frames.setdefault(index, frame)
        return frame

    def plan(self, index: int, layers: list[SALayerConfig]) -> EncoderPlan:
        cached = self._plans.get(index)
        if cached is not None and cached.matches(layers):
            return cached
        plan = build_plan(self[index].cloud.points, layers)
        if self.cache:
            with self._lock:
                self._plans[index] = plan
        return plan

    def frame_ids(self, indices: list[int]) -> list[str]:
        return [self.records[i].frame_id for i in indices]
