"""Unit tests for the synthetic dataset builder and per-frame dataset access."""

import numpy as np
import pytest
import yaml

from pointloc.core.exceptions import DatasetIOError, EmptySplitError, ManifestError
from pointloc.data.cloud_io import load_cloud
from pointloc.data.dataset import FrameDataset, frame_seed
from pointloc.data.manifest import DatasetManifest
from pointloc.data.scene import generate_scene
from pointloc.data.synthetic import (
    CLOUD_DIR,
    MANIFEST_NAME,
    SCENE_NAME,
    build_synthetic_dataset,
    segment_sizes,
    smooth_trajectory,
)


class TestSyntheticDataset:
    """Tests for building synthetic datasets."""

    def test_segment_sizes(self) -> None:
        assert segment_sizes(64) == [45, 6, 13]
        assert segment_sizes(16) == [11, 2, 3]
        assert segment_sizes(1) == [1, 0, 0]

    def test_sixty_four_frames(self, tmp_path) -> None:
        manifest = build_synthetic_dataset(64, seed=0, out_dir=tmp_path, beams=4, azimuth_steps=30)
        assert len(manifest) == 64
        assert len(list((tmp_path / CLOUD_DIR).glob("*.pcld"))) == 64
        assert (tmp_path / MANIFEST_NAME).is_file()
        assert manifest.frame_counts == {"train": 45, "val": 6, "test": 13}
        scene = yaml.safe_load((tmp_path / SCENE_NAME).read_text(encoding="utf-8"))
        assert scene == generate_scene(0).to_dict()

    def test_poses_reload_exactly(self, synthetic_manifest) -> None:
        scene = generate_scene(3)
        expected = smooth_trajectory(scene, 16, seed=3)
        for record, pose in zip(synthetic_manifest.records, expected, strict=True):
            assert record.pose.q[0] >= 0.0
            np.testing.assert_array_equal(record.pose.t, pose.t)
            np.testing.assert_array_equal(record.pose.q, pose.q)

    def test_splits_are_sequences(self, synthetic_manifest) -> None:
        assert synthetic_manifest.sequences("train") == ["seq-00"]
        assert synthetic_manifest.sequences("val") == ["seq-01"]
        assert synthetic_manifest.sequences("test") == ["seq-02"]

    def test_full_scans_on_disk(self, synthetic_manifest) -> None:
        cloud = load_cloud(synthetic_manifest.records[0].cloud_path)
        assert len(cloud) == 8 * 90

    def test_trajectory_clears_boxes(self) -> None:
        scene = generate_scene(6)
        for pose in smooth_trajectory(scene, 40, seed=6):
            scene.check_sensor_position(pose.t)

    def test_same_seed_same_files(self, tmp_path) -> None:
        a = build_synthetic_dataset(4, seed=9, out_dir=tmp_path / "a", beams=2, azimuth_steps=20)
        b = build_synthetic_dataset(4, seed=9, out_dir=tmp_path / "b", beams=2, azimuth_steps=20)
        for ra, rb in zip(a.records, b.records, strict=True):
            assert ra.cloud_path.read_bytes() == rb.cloud_path.read_bytes()

    def test_output_is_a_file(self, tmp_path) -> None:
        target = tmp_path / "taken"
        target.write_text("occupied", encoding="utf-8")
        with pytest.raises(DatasetIOError):
            build_synthetic_dataset(4, seed=0, out_dir=target)


class TestFrameDataset:
    """Tests for resampled frame access."""

    def test_frames_have_fixed_size(self, synthetic_manifest) -> None:
        dataset = FrameDataset(synthetic_manifest, "train", n_points=256, seed=1)
        assert len(dataset) == 11
        frame = dataset[0]
        assert len(frame.cloud) == 256
        np.testing.assert_array_equal(frame.target.as_vector(), frame.pose.to_log().as_vector())
        assert frame.frame_id == "frame_00000"

    def test_resampling_is_seeded(self, synthetic_manifest) -> None:
        a = FrameDataset(synthetic_manifest, "test", n_points=256, seed=1, cache=False)
        b = FrameDataset(synthetic_manifest, "test", n_points=256, seed=1, cache=False)
        c = FrameDataset(synthetic_manifest, "test", n_points=256, seed=2, cache=False)
        np.testing.assert_array_equal(a[1].cloud.points, b[1].cloud.points)
        assert not np.array_equal(a[1].cloud.points, c[1].cloud.points)

    def test_cache_reuses_frames_and_plans(self, synthetic_manifest, tiny_scale) -> None:
        dataset = FrameDataset(synthetic_manifest, "val", n_points=256)
        assert dataset[0] is dataset[0]
        layers = tiny_scale.sa_layers()
        assert dataset.plan(0, layers) is dataset.plan(0, layers)

    def test_upsamples_small_scans(self, synthetic_manifest) -> None:
        dataset = FrameDataset(synthetic_manifest, "val", n_points=1000)
        assert len(dataset[1].cloud) == 1000

    def test_out_of_range(self, synthetic_manifest) -> None:
        dataset = FrameDataset(synthetic_manifest, "val", n_points=256)
        with pytest.raises(IndexError):
            dataset[2]

    def test_empty_split(self, synthetic_manifest) -> None:
        train_only = DatasetManifest(records=synthetic_manifest.split("train"))
        with pytest.raises(EmptySplitError):
            FrameDataset(train_only, "test", n_points=256)

    def test_unknown_split(self, synthetic_manifest) -> None:
        with pytest.raises(ManifestError):
            FrameDataset(synthetic_manifest, "holdout", n_points=256)

    def test_frame_ids(self, synthetic_manifest) -> None:
        dataset = FrameDataset(synthetic_manifest, "test", n_points=256)
        assert dataset.frame_ids([0, 2]) == ["frame_00013", "frame_00015"]

    def test_frame_seed_stable(self) -> None:
        assert frame_seed(0, 3) == frame_seed(0, 3)
        assert frame_seed(0, 3) != frame_seed(0, 4)
        assert frame_seed(0, 3) != frame_seed(1, 3)
