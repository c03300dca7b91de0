"""Unit tests for binary cloud files."""

import struct

import numpy as np
import pytest

from pointloc.core.exceptions import CloudParseError, DatasetIOError
from pointloc.data.cloud_io import (
    MAGIC,
    VERSION,
    decode_cloud,
    encode_cloud,
    load_cloud,
    save_cloud,
)
from pointloc.sampling.kernels import PointCloud


def header(count: int, magic: bytes = MAGIC, version: int = VERSION) -> bytes:
    return struct.pack("<4sII", magic, version, count)


class TestCloudFiles:
    """Tests for writing and reading clouds."""

    def test_round_trip_bitwise(self, tmp_path) -> None:
        pts = np.random.default_rng(0).normal(scale=10.0, size=(500, 3)).astype(np.float32)
        path = tmp_path / "frame.pcld"
        written = save_cloud(path, PointCloud(pts.astype(np.float64)))
        assert written == 12 + 500 * 12
        loaded = load_cloud(path)
        assert loaded.points.dtype == np.float64
        np.testing.assert_array_equal(loaded.points, pts.astype(np.float64))

    def test_accepts_raw_arrays(self, tmp_path) -> None:
        path = tmp_path / "raw.pcld"
        save_cloud(path, [[1.0, 2.0, 3.0]])
        assert load_cloud(path).points.tolist() == [[1.0, 2.0, 3.0]]

    def test_missing_file(self, tmp_path) -> None:
        with pytest.raises(DatasetIOError):
            load_cloud(tmp_path / "absent.pcld")

    def test_float32_overflow(self) -> None:
        with pytest.raises(DatasetIOError):
            encode_cloud([[1e300, 0.0, 0.0]])


class TestDecodeErrors:
    """Tests for malformed cloud bytes."""

    def test_empty_cloud(self) -> None:
        with pytest.raises(CloudParseError) as exc:
            decode_cloud(header(0))
        assert exc.value.offset == 8

    def test_short_header(self) -> None:
        with pytest.raises(CloudParseError) as exc:
            decode_cloud(MAGIC + b"\x01")
        assert exc.value.offset == 5

    def test_bad_magic(self) -> None:
        with pytest.raises(CloudParseError, match="magic"):
            decode_cloud(header(1, magic=b"NOPE") + bytes(12))

    def test_bad_version(self) -> None:
        with pytest.raises(CloudParseError) as exc:
            decode_cloud(header(1, version=7) + bytes(12))
        assert exc.value.offset == 4

    def test_count_mismatch(self) -> None:
        blob = header(3) + np.zeros((2, 3), dtype="<f4").tobytes()
        with pytest.raises(CloudParseError) as exc:
            decode_cloud(blob, "frame.pcld")
        assert exc.value.offset == 12 + 24
        assert exc.value.path == "frame.pcld"

    def test_non_finite_offset(self) -> None:
        values = np.zeros((2, 3), dtype="<f4")
        values[1, 2] = np.nan
        with pytest.raises(CloudParseError) as exc:
            decode_cloud(header(2) + values.tobytes())
        assert exc.value.offset == 12 + 4 * 5

    def test_encode_layout(self) -> None:
        blob = encode_cloud([[0.5, -1.0, 2.0]])
        assert blob[:12] == header(1)
        assert np.frombuffer(blob[12:], dtype="<f4").tolist() == [0.5, -1.0, 2.0]
