"""Unit tests for synthetic rooms and the LiDAR simulator."""

import math

import numpy as np
import pytest

from pointloc.core.exceptions import InvalidArgumentError, SceneError
from pointloc.data.scene import (
    MAX_BOX_HEIGHT,
    ROOM_SIZE,
    Box,
    SyntheticScene,
    beam_directions,
    generate_scene,
    simulate_scan,
)
from pointloc.data.synthetic import smooth_trajectory
from pointloc.geometry.quaternion import Pose, quat_from_axis_angle, quat_multiply

EMPTY_ROOM = SyntheticScene(room=Box(lo=np.zeros(3), hi=np.array(ROOM_SIZE)), boxes=())


class TestGenerateScene:
    """Tests for room generation."""

    def test_deterministic(self) -> None:
        assert generate_scene(11).to_dict() == generate_scene(11).to_dict()
        assert generate_scene(11).to_dict() != generate_scene(12).to_dict()

    @pytest.mark.parametrize("seed", range(10))
    def test_boxes_stand_inside_room(self, seed: int) -> None:
        scene = generate_scene(seed)
        assert 6 <= len(scene.boxes) <= 12
        assert scene.surface_count == 6 + len(scene.boxes)
        for box in scene.boxes:
            assert box.lo[2] == 0.0
            assert box.hi[2] - box.lo[2] <= MAX_BOX_HEIGHT
            assert (box.lo >= scene.room.lo).all()
            assert (box.hi <= scene.room.hi).all()

    def test_bad_room_size(self) -> None:
        with pytest.raises(InvalidArgumentError):
            generate_scene(0, room_size=(4.0, 0.5, 3.0))

    def test_box_outside_room_rejected(self) -> None:
        with pytest.raises(SceneError):
            SyntheticScene(
                room=Box(lo=np.zeros(3), hi=np.ones(3) * 2),
                boxes=(Box(lo=np.ones(3), hi=np.ones(3) * 3),),
            )

    def test_degenerate_box(self) -> None:
        with pytest.raises(SceneError):
            Box(lo=np.zeros(3), hi=np.array([1.0, 0.0, 1.0]))


class TestBox:
    """Tests for box geometry."""

    def test_surface_distance(self) -> None:
        box = Box(lo=np.zeros(3), hi=np.ones(3))
        dist = box.surface_distance([[0.5, 0.5, 0.5], [2.0, 0.5, 0.5], [0.5, 0.5, 1.0]])
        np.testing.assert_allclose(dist, [0.5, 1.0, 0.0])


class TestSimulateScan:
    """Tests for ray casting."""

    def test_wall_range(self) -> None:
        pose = Pose.from_raw([2.0, 2.5, 1.5], [1.0, 0, 0, 0])
        cloud = simulate_scan(EMPTY_ROOM, pose, beams=1, azimuth_steps=4)
        assert len(cloud) == 4
        np.testing.assert_allclose(cloud.points[0], [2.0, 0.0, 0.0], atol=1e-9)
        np.testing.assert_allclose(cloud.points[1], [0.0, 2.5, 0.0], atol=1e-9)

    def test_rotated_sensor(self) -> None:
        pose = Pose.from_raw([2.0, 2.5, 1.5], quat_from_axis_angle([0, 0, 1.0], math.pi / 2))
        cloud = simulate_scan(EMPTY_ROOM, pose, beams=1, azimuth_steps=4)
        # Sensor +x now faces world +y, 2.5 m from the wall
        np.testing.assert_allclose(cloud.points[0], [2.5, 0.0, 0.0], atol=1e-9)

    def test_points_lie_on_surfaces(self) -> None:
        scene = generate_scene(4)
        pose = smooth_trajectory(scene, 3, seed=4)[1]
        cloud = simulate_scan(scene, pose, beams=8, azimuth_steps=90)
        assert len(cloud) <= 8 * 90
        world = pose.sensor_to_world(cloud.points)
        assert scene.distance_to_surfaces(world).max() < 1e-9
        assert (world >= scene.room.lo - 1e-9).all()
        assert (world <= scene.room.hi + 1e-9).all()

    def test_two_poses_agree_in_world_frame(self) -> None:
        """Test that a sensor turned by whole azimuth steps sees the same world points."""
        scene = generate_scene(4)
        first = smooth_trajectory(scene, 3, seed=4)[1]
        turn = quat_from_axis_angle([0, 0, 1.0], 7 * 2.0 * math.pi / 90)
        second = Pose.from_raw(first.t, quat_multiply(first.q, turn))
        world = [
            pose.sensor_to_world(simulate_scan(scene, pose, beams=8, azimuth_steps=90).points)
            for pose in (first, second)
        ]
        assert world[0].shape == world[1].shape
        gaps = np.linalg.norm(world[0][:, None, :] - world[1][None, :, :], axis=-1)
        assert gaps.min(axis=1).max() < 1e-6
        assert gaps.min(axis=0).max() < 1e-6

    def test_direction_layout(self) -> None:
        dirs = beam_directions(3, 10)
        assert dirs.shape == (30, 3)
        np.testing.assert_allclose(np.linalg.norm(dirs, axis=1), 1.0)
        assert dirs[:10, 2].max() < 0.0

    def test_truncated_noise(self) -> None:
        scene = generate_scene(2)
        pose = smooth_trajectory(scene, 1, seed=2)[0]
        clean = simulate_scan(scene, pose, beams=8, azimuth_steps=60)
        noisy = simulate_scan(scene, pose, beams=8, azimuth_steps=60, noise_sigma=0.01, seed=5)
        again = simulate_scan(scene, pose, beams=8, azimuth_steps=60, noise_sigma=0.01, seed=5)
        np.testing.assert_array_equal(noisy.points, again.points)
        delta = np.abs(
            np.linalg.norm(noisy.points, axis=1) - np.linalg.norm(clean.points, axis=1)
        )
        assert delta.max() <= 0.03 + 1e-12
        assert delta.max() > 0.0

    def test_max_range_drops_far_returns(self) -> None:
        pose = Pose.from_raw([2.0, 2.5, 1.5], [1.0, 0, 0, 0])
        cloud = simulate_scan(EMPTY_ROOM, pose, beams=1, azimuth_steps=4, max_range=2.2)
        assert len(cloud) == 2

    def test_sensor_outside_room(self) -> None:
        with pytest.raises(SceneError):
            simulate_scan(EMPTY_ROOM, Pose.from_raw([9.0, 1.0, 1.0], [1.0, 0, 0, 0]))

    def test_sensor_inside_box(self) -> None:
        scene = generate_scene(0)
        inside = (scene.boxes[0].lo + scene.boxes[0].hi) / 2.0
        with pytest.raises(SceneError):
            simulate_scan(scene, Pose.from_raw(inside, [1.0, 0, 0, 0]))

    def test_negative_noise(self) -> None:
        pose = Pose.from_raw([2.0, 2.5, 1.5], [1.0, 0, 0, 0])
        with pytest.raises(InvalidArgumentError):
            simulate_scan(EMPTY_ROOM, pose, noise_sigma=-1.0)
