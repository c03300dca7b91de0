"""Unit tests for the binary checkpoint format."""

import struct

import numpy as np
import pytest

from pointloc.core.exceptions import CheckpointError
from pointloc.model.checkpoint import (
    FORMAT_VERSION,
    MAGIC,
    SCALE_RECORD,
    checkpoint_records,
    decode_records,
    encode_records,
    load_checkpoint,
    save_checkpoint,
    scale_from_array,
    scale_to_array,
)
from pointloc.model.params import init_params
from pointloc.schemas.model import ModelScale

HEADER_SIZE = 12


def record_bytes(name: str, array: np.ndarray) -> bytes:
    return encode_records({name: array})[HEADER_SIZE:]


class TestRecords:
    """Tests for record encoding and decoding."""

    def test_layout(self) -> None:
        blob = encode_records({"a": np.array([1.5, -2.0])})
        assert blob[:4] == MAGIC
        assert struct.unpack("<II", blob[4:12]) == (FORMAT_VERSION, 1)
        assert len(blob) == HEADER_SIZE + 4 + 1 + 4 + 4 + 16

    def test_decode_preserves_order_and_bits(self) -> None:
        values = {
            "z": np.array([np.pi, -0.0, 1e-308]),
            "a": np.arange(6, dtype=np.float64).reshape(2, 3),
        }
        decoded = decode_records(encode_records(values))
        assert list(decoded) == ["z", "a"]
        for name, array in values.items():
            assert decoded[name].shape == array.shape
            assert decoded[name].tobytes() == array.tobytes()

    def test_bad_magic(self) -> None:
        blob = b"XXXX" + encode_records({"a": np.ones(1)})[4:]
        with pytest.raises(CheckpointError, match="magic"):
            decode_records(blob)

    def test_bad_version(self) -> None:
        blob = bytearray(encode_records({"a": np.ones(1)}))
        blob[4:8] = struct.pack("<I", FORMAT_VERSION + 1)
        with pytest.raises(CheckpointError, match="version"):
            decode_records(bytes(blob))

    def test_truncated(self) -> None:
        blob = encode_records({"a": np.ones(4)})
        with pytest.raises(CheckpointError, match="truncated"):
            decode_records(blob[:-3])

    def test_trailing_bytes(self) -> None:
        blob = encode_records({"a": np.ones(2)}) + b"\x00"
        with pytest.raises(CheckpointError, match="trailing"):
            decode_records(blob)

    def test_duplicate_record(self) -> None:
        body = record_bytes("a", np.ones(2)) + record_bytes("a", np.zeros(2))
        blob = MAGIC + struct.pack("<II", FORMAT_VERSION, 2) + body
        with pytest.raises(CheckpointError, match="twice"):
            decode_records(blob)


class TestScaleRecord:
    """Tests for the stored model scale."""

    @pytest.mark.parametrize("name", ["full", "small", "tiny"])
    def test_presets_recognized(self, name: str) -> None:
        scale = ModelScale.preset(name)
        assert scale_from_array(scale_to_array(scale)) == scale

    def test_custom_scale(self) -> None:
        scale = ModelScale(name="mine", n_input=512, width_divisor=2, point_divisor=8)
        restored = scale_from_array(scale_to_array(scale))
        assert restored.name == "custom"
        assert restored.n_input == 512

    def test_short_record(self) -> None:
        with pytest.raises(CheckpointError):
            scale_from_array(np.ones(3))


class TestCheckpointFiles:
    """Tests for saving and loading parameters."""

    def test_round_trip_bitwise(self, tmp_path, tiny_params) -> None:
        path = tmp_path / "model.ploc"
        size = save_checkpoint(path, tiny_params)
        assert size == path.stat().st_size
        loaded = load_checkpoint(path)
        assert loaded.scale == tiny_params.scale
        assert list(loaded) == list(tiny_params)
        for name in tiny_params:
            assert loaded[name].data.tobytes() == tiny_params[name].data.tobytes()

    def test_scale_mismatch(self, tmp_path, tiny_params) -> None:
        path = tmp_path / "model.ploc"
        save_checkpoint(path, tiny_params)
        with pytest.raises(CheckpointError, match="scale"):
            load_checkpoint(path, ModelScale.preset("small"))

    def test_auxiliary_records_ignored(self, tmp_path, tiny_params) -> None:
        path = tmp_path / "model.ploc"
        extra = {"adam.step": np.array([3.0]), "train.epoch": np.array([2.0])}
        save_checkpoint(path, tiny_params, extra=extra)
        loaded = load_checkpoint(path, tiny_params.scale)
        assert "adam.step" not in loaded
        assert loaded.parameter_count() == tiny_params.parameter_count()

    def test_extra_prefix_validated(self, tiny_params) -> None:
        with pytest.raises(CheckpointError):
            checkpoint_records(tiny_params, extra={"other.value": np.ones(1)})

    def test_unknown_record_rejected(self, tmp_path, tiny_params) -> None:
        records = checkpoint_records(tiny_params)
        records["mystery.weight"] = np.ones(2)
        path = tmp_path / "model.ploc"
        path.write_bytes(encode_records(records))
        with pytest.raises(CheckpointError, match="unexpected"):
            load_checkpoint(path)

    def test_missing_parameter(self, tmp_path, tiny_params) -> None:
        records = checkpoint_records(tiny_params)
        del records["attention.bias"]
        path = tmp_path / "model.ploc"
        path.write_bytes(encode_records(records))
        with pytest.raises(CheckpointError, match="lacks"):
            load_checkpoint(path)

    def test_missing_scale(self, tmp_path, tiny_params) -> None:
        records = checkpoint_records(tiny_params)
        del records[SCALE_RECORD]
        path = tmp_path / "model.ploc"
        path.write_bytes(encode_records(records))
        with pytest.raises(CheckpointError):
            load_checkpoint(path)

    def test_unreadable_file(self, tmp_path) -> None:
        with pytest.raises(CheckpointError):
            load_checkpoint(tmp_path / "absent.ploc")

    def test_other_seed_differs(self, tmp_path, tiny_scale) -> None:
        path = tmp_path / "model.ploc"
        save_checkpoint(path, init_params(9, tiny_scale))
        loaded = load_checkpoint(path)
        baseline = init_params(0, tiny_scale)["sa1.r0.mlp0.weight"].data
        assert not np.array_equal(loaded["sa1.r0.mlp0.weight"].data, baseline)
