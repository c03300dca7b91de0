"""
Binary checkpoint format.

Layout (little-endian): magic ``PLOC``, u32 format version, u32 record count,
then per record: u32 name length, UTF-8 name, u32 rank, rank x u32 dims and
the float64 payload. Values round-trip bit-exactly.
"""

from __future__ import annotations

import logging
import struct
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import ValidationError

from pointloc.core.exceptions import CheckpointError
from pointloc.core.fileio import atomic_write_bytes
from pointloc.model.params import ModelParams, init_params
from pointloc.schemas.model import ModelScale

logger = logging.getLogger(__name__)

MAGIC = b"PLOC"
FORMAT_VERSION = 1
SCALE_RECORD = "model.scale"

# Records outside the parameter registry that model loading skips.
AUXILIARY_PREFIXES = ("adam.", "train.", SCALE_RECORD)

_U32 = struct.Struct("<I")


def scale_to_array(scale: ModelScale) -> np.ndarray:
    return np.array(
        [
            scale.n_input,
            scale.width_divisor,
            scale.point_divisor,
            scale.sample_divisor,
            scale.radius_scale,
            *scale.radius_multipliers,
        ],
        dtype=np.float64,
    )


def scale_from_array(values: np.ndarray) -> ModelScale:
    """Rebuild a ModelScale, naming it after the preset it matches (``custom`` otherwise)."""
    if values.shape[0] < 6:
        raise CheckpointError(f"'{SCALE_RECORD}' record has {values.shape[0]} values, need >= 6")
    fields: dict[str, Any] = {
        "n_input": int(values[0]),
        "width_divisor": int(values[1]),
        "point_divisor": int(values[2]),
        "sample_divisor": int(values[3]),
        "radius_scale": float(values[4]),
        "radius_multipliers": [float(v) for v in values[5:]],
    }
    try:
        for name in ("full", "small", "tiny"):
            candidate = ModelScale.preset(name, radius_multipliers=fields["radius_multipliers"])
            if all(getattr(candidate, key) == value for key, value in fields.items()):
                return candidate
        return ModelScale(name="custom", **fields)
    except ValidationError as exc:
        raise CheckpointError(f"Invalid '{SCALE_RECORD}' record: {exc}") from exc


def encode_records(records: dict[str, np.ndarray]) -> bytes:
    chunks = [MAGIC, _U32.pack(FORMAT_VERSION), _U32.pack(len(records))]
    for name, array in records.items():
        data = np.asarray(array, dtype=np.float64)
        raw_name = name.encode("utf-8")
        chunks.append(_U32.pack(len(raw_name)))
        chunks.append(raw_name)
        chunks.append(_U32.pack(data.ndim))
        chunks.extend(_U32.pack(dim) for dim in data.shape)
        chunks.append(data.astype("<f8").tobytes())
    return b"".join(chunks)


class _Reader:
    def __init__(self, blob: bytes, source: str) -> None:
        self.blob = blob
        self.source = source
        self.offset = 0

    def take(self, size: int, what: str) -> bytes:
        end = self.offset + size
        if end > len(self.blob):
            raise CheckpointError(
                f"{self.source}: truncated while reading {what} at byte offset {self.offset}"
            )
        chunk = self.blob[self.offset : end]
        self.offset = end
        return chunk

    def u32(self, what: str) -> int:
        return int(_U32.unpack(self.take(4, what))[0])


def decode_records(blob: bytes, source: str = "<checkpoint>") -> dict[str, np.ndarray]:
    """Parse checkpoint bytes into named arrays, in file order."""
    reader = _Reader(blob, source)
    if reader.take(4, "magic") != MAGIC:
        raise CheckpointError(f"{source}: bad magic, not a PLOC checkpoint")
    version = reader.u32("format version")
    if version != FORMAT_VERSION:
        raise CheckpointError(f"{source}: unsupported format version {version}")

    records: dict[str, np.ndarray] = {}
    for _ in range(reader.u32("record count")):
        name = reader.take(reader.u32("name length"), "name").decode("utf-8", errors="replace")
        rank = reader.u32(f"rank of '{name}'")
        dims = tuple(reader.u32(f"dims of '{name}'") for _ in range(rank))
        count = int(np.prod(dims)) if dims else 1
        payload = reader.take(8 * count, f"payload of '{name}'")
        if name in records:
            raise CheckpointError(f"{source}: record '{name}' appears twice")
        records[name] = np.frombuffer(payload, dtype="<f8").astype(np.float64).reshape(dims)
    if reader.offset != len(blob):
        raise CheckpointError(
            f"{source}: {len(blob) - reader.offset} trailing bytes at offset {reader.offset}"
        )
    return records


def checkpoint_records(
    params: ModelParams, extra: dict[str, np.ndarray] | None = None
) -> dict[str, np.ndarray]:
    """Scale record, every parameter (loss factors included), then auxiliary records."""
    records: dict[str, np.ndarray] = {SCALE_RECORD: scale_to_array(params.scale)}
    records.update((name, tensor.data) for name, tensor in params.items())
    for name, value in (extra or {}).items():
        if not name.startswith(AUXILIARY_PREFIXES):
            raise CheckpointError(f"Auxiliary record '{name}' must use an adam./train. prefix")
        records[name] = value
    return records


def save_checkpoint(
    path: str | Path, params: ModelParams, extra: dict[str, np.ndarray] | None = None
) -> int:
    """
    Write a checkpoint atomically.

    Returns:
        Bytes written
    """
    records = checkpoint_records(params, extra)
    blob = encode_records(records)
    atomic_write_bytes(Path(path), blob)
    logger.debug(f"Saved checkpoint {path} ({len(records)} records, {len(blob)} bytes)")
    return len(blob)


def read_checkpoint(path: str | Path) -> dict[str, np.ndarray]:
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise CheckpointError(f"Cannot read checkpoint {path}: {exc}") from exc
    return decode_records(blob, str(path))


def params_from_records(
    records: dict[str, np.ndarray], scale: ModelScale | None = None, source: str = "<checkpoint>"
) -> ModelParams:
    if SCALE_RECORD not in records:
        raise CheckpointError(f"{source}: missing '{SCALE_RECORD}' record")
    stored = scale_from_array(records[SCALE_RECORD])
    if scale is not None and scale_to_array(scale).tolist() != scale_to_array(stored).tolist():
        raise CheckpointError(
            f"{source}: checkpoint was written for scale '{stored.name}', not '{scale.name}'"
        )
    params = init_params(0, stored)
    unexpected = [
        name
        for name in records
        if name not in params and not name.startswith(AUXILIARY_PREFIXES)
    ]
    if unexpected:
        raise CheckpointError(f"{source}: unexpected records {', '.join(unexpected[:5])}")
    params.load_state({name: records[name] for name in params if name in records})
    return params


def load_checkpoint(path: str | Path, scale: ModelScale | None = None) -> ModelParams:
    """
    Load model parameters; optimizer and training records are ignored.

    Args:
        path: Checkpoint file
        scale: When given, the checkpoint must have been written for this scale
    """
    params = params_from_records(read_checkpoint(path), scale, str(path))
    logger.info(f"Loaded checkpoint {path} (scale '{params.scale.name}')")
    return params
