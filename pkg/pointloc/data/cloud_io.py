"""
Binary cloud files.

Layout (little-endian): magic ``PCLD``, u32 version, u32 point count, then
count x 3 float32 coordinates.
"""

from __future__ import annotations

import logging
import struct
from pathlib import Path

import numpy as np
from numpy.typing import ArrayLike

from pointloc.core.exceptions import CloudParseError, DatasetIOError
from pointloc.core.fileio import atomic_write_bytes
from pointloc.sampling.kernels import PointCloud, as_points

logger = logging.getLogger(__name__)

MAGIC = b"PCLD"
VERSION = 1
_HEADER = struct.Struct("<4sII")


def encode_cloud(points: ArrayLike) -> bytes:
    pts = as_points(points).astype("<f4")
    if not np.isfinite(pts).all():
        raise DatasetIOError("Cloud coordinates overflow float32")
    return _HEADER.pack(MAGIC, VERSION, pts.shape[0]) + pts.tobytes()


def decode_cloud(blob: bytes, source: str = "<cloud>") -> PointCloud:
    """
    Parse cloud bytes.

    Raises:
        CloudParseError: On short header, bad magic, unknown version, empty cloud,
            payload/count mismatch or non-finite coordinates, with the byte offset
    """
    if len(blob) < _HEADER.size:
        raise CloudParseError(source, len(blob), "truncated header")
    magic, version, count = _HEADER.unpack_from(blob, 0)
    if magic != MAGIC:
        raise CloudParseError(source, 0, f"bad magic {magic!r}")
    if version != VERSION:
        raise CloudParseError(source, 4, f"unsupported version {version}")
    if count == 0:
        raise CloudParseError(source, 8, "cloud has no points")

    payload = len(blob) - _HEADER.size
    expected = count * 12
    if payload != expected:
        raise CloudParseError(
            source,
            _HEADER.size + min(payload, expected),
            f"header declares {count} points ({expected} bytes), payload has {payload} bytes",
        )

    values = np.frombuffer(blob, dtype="<f4", offset=_HEADER.size)
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise CloudParseError(source, _HEADER.size + 4 * int(bad[0]), "non-finite coordinate")
    return PointCloud(values.reshape(count, 3).astype(np.float64))


def load_cloud(path: str | Path) -> PointCloud:
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise DatasetIOError(f"Cannot read cloud {path}: {exc}") from exc
    return decode_cloud(blob, str(path))


def save_cloud(path: str | Path, cloud: PointCloud | ArrayLike) -> int:
    """Write a cloud as float32; returns bytes written."""
    points = cloud.points if isinstance(cloud, PointCloud) else cloud
    blob = encode_cloud(points)
    atomic_write_bytes(path, blob)
    logger.debug(f"Wrote {path} ({len(blob)} bytes)")
    return len(blob)
