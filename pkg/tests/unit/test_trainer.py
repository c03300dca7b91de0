"""Unit tests for the training loop and the gradient audit."""

from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from pointloc.core.exceptions import (
    CheckpointError,
    ConfigError,
    DatasetIOError,
    TrainingDivergedError,
)
from pointloc.core.metrics import TrainingMetrics
from pointloc.data.dataset import FrameDataset
from pointloc.model.params import init_params
from pointloc.schemas.config import TrainConfig
from pointloc.schemas.model import ModelScale
from pointloc.training.gradcheck import check_model_gradients, gradcheck_sample
from pointloc.training.trainer import (
    BATCH_RECORD,
    CHECKPOINT_NAME,
    LOSS_LOG_NAME,
    EpochLog,
    RunProgress,
    batch_gradients,
    read_loss_log,
    sample_gradients,
    train,
    validation_loss,
)

TINY = TrainConfig(model_scale="tiny", epochs=1, batch_size=4, seed=0)


@pytest.fixture
def train_frames(synthetic_manifest) -> FrameDataset:
    return FrameDataset(synthetic_manifest, "train", n_points=256, seed=0)


class TestEpochLog:
    def test_line_format(self):
        entry = EpochLog(epoch=3, train_loss=-1.25, beta=0.5, gamma=-2.75, seconds=1.23456)
        assert entry.to_line() == "3\t-1.25\t0.5\t-2.75\t1.235"
        assert EpochLog.from_line(entry.to_line() + "\n") == EpochLog(3, -1.25, 0.5, -2.75, 1.235)

    def test_bad_line(self):
        with pytest.raises(DatasetIOError):
            EpochLog.from_line("1\t2.0\t3.0")


class TestRunProgress:
    def test_restores_mid_epoch_position(self):
        progress = RunProgress(epoch=2, batch=1, loss_sum=-3.5, seen=4)
        restored = RunProgress.from_records(progress.to_records(), "run.ploc")
        assert restored == progress
        assert restored.mark == (2, 1)

    def test_missing_batch_record(self):
        records = RunProgress(epoch=1).to_records()
        del records[BATCH_RECORD]
        with pytest.raises(CheckpointError, match="train.batch"):
            RunProgress.from_records(records, "run.ploc")


class TestGradients:
    def test_singleton_batch_matches_sample(self, tiny_params, train_frames):
        loss, grads = sample_gradients(tiny_params, train_frames, 2, "learned")
        batch_loss_value, batch_grads = batch_gradients(tiny_params, train_frames, [2], "learned")
        assert batch_loss_value == loss
        for name, grad in zip(tiny_params, grads, strict=True):
            np.testing.assert_array_equal(batch_grads[name], grad)

    def test_batch_is_mean(self, tiny_params, train_frames):
        samples = [sample_gradients(tiny_params, train_frames, i, "learned") for i in (0, 5)]
        loss, grads = batch_gradients(tiny_params, train_frames, [0, 5], "learned")
        assert loss == pytest.approx((samples[0][0] + samples[1][0]) / 2.0)
        beta_index = list(tiny_params).index("loss.beta")
        expected = (samples[0][1][beta_index] + samples[1][1][beta_index]) / 2.0
        np.testing.assert_allclose(grads["loss.beta"], expected, rtol=1e-12)

    def test_threads_match_serial(self, tiny_params, train_frames):
        serial = batch_gradients(tiny_params, train_frames, [0, 1, 2], "learned")
        with ThreadPoolExecutor(max_workers=3) as executor:
            threaded = batch_gradients(tiny_params, train_frames, [0, 1, 2], "learned", executor)
        assert serial[0] == threaded[0]
        for name in tiny_params:
            np.testing.assert_array_equal(serial[1][name], threaded[1][name])

    def test_every_parameter_gets_gradient(self, tiny_params, train_frames):
        _, grads = batch_gradients(tiny_params, train_frames, [0], "learned")
        assert set(grads) == set(tiny_params)
        assert grads["loss.beta"][0] != 0.0
        assert np.abs(grads["sa1.r0.mlp0.weight"]).sum() > 0.0


class TestTrain:
    def test_max_steps(self, train_frames):
        config = TINY.model_copy(update={"epochs": 5, "max_steps": 2})
        result = train(config, train_frames)
        assert result.state.step == 2
        assert len(result.history) == 1
        assert result.checkpoint is None

    def test_updates_parameters(self, train_frames):
        start = init_params(0, ModelScale.preset("tiny"))
        before = start.state()
        result = train(TINY, train_frames, params=start)
        assert result.state.step == 3
        assert not np.array_equal(before["loss.gamma"], result.params["loss.gamma"].data)

    def test_writes_log_and_checkpoint(self, tmp_path, train_frames, synthetic_manifest):
        metrics = TrainingMetrics()
        val = FrameDataset(synthetic_manifest, "val", n_points=256, seed=0)
        config = TINY.model_copy(update={"epochs": 2, "checkpoint_every": 5, "max_steps": 4})
        result = train(config, train_frames, out_dir=tmp_path, val_dataset=val, metrics=metrics)
        log = read_loss_log(tmp_path / LOSS_LOG_NAME)
        assert [e.epoch for e in log] == [1, 2]
        assert log[-1].train_loss == result.history[-1].train_loss
        assert result.history[-1].val_loss is not None
        assert (tmp_path / CHECKPOINT_NAME).is_file()
        assert metrics.registry.get_sample_value("pointloc_train_steps_total") == 4.0

    def test_point_count_mismatch(self, synthetic_manifest):
        frames = FrameDataset(synthetic_manifest, "train", n_points=300)
        with pytest.raises(ConfigError):
            train(TINY, frames)

    def test_foreign_params(self, train_frames):
        with pytest.raises(ConfigError):
            train(TINY, train_frames, params=init_params(0, ModelScale.preset("tiny", [1.0, 2.0])))

    def test_divergence_names_batch(self, train_frames):
        params = init_params(0, ModelScale.preset("tiny"))
        params["loss.gamma"].data[:] = -1000.0
        with pytest.raises(TrainingDivergedError) as exc:
            train(TINY, train_frames, params=params)
        assert "frame_" in exc.value.batch_id

    def test_validation_loss_is_finite(self, tiny_params, synthetic_manifest):
        val = FrameDataset(synthetic_manifest, "val", n_points=256)
        assert np.isfinite(validation_loss(tiny_params, val, "learned"))


class TestGradientAudit:
    def test_sample_shape(self):
        cloud, target = gradcheck_sample(seed=1, n_points=256)
        assert len(cloud) == 256
        assert target.as_vector().shape == (6,)

    def test_tiny_model_passes(self, tiny_params):
        cloud, target = gradcheck_sample(seed=0, n_points=256)
        checks = check_model_gradients(tiny_params, cloud, target, coords=3)
        assert [c.layer for c in checks] == [
            "sa1", "sa2", "sa3", "sa4", "attention", "group_all",
            "regressor.t", "regressor.w", "loss",
        ]
        assert all(c.passed(1e-4) for c in checks)
        assert checks[-1].tensors == 2
        assert checks[-1].coords == 2
