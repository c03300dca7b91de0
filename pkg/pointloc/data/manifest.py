"""
Dataset manifests.

One record per line, comma-separated::

    cloud_path, tx, ty, tz, qw, qx, qy, qz, sequence_tag, split

Lines starting with ``#`` and blank lines are ignored. Relative cloud paths
resolve against the manifest's directory.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from collections import Counter
from collections.abc import Iterable
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, cast, get_args

import numpy as np

from pointloc.core.exceptions import (
    DatasetIOError,
    DegenerateQuaternionError,
    ManifestError,
)
from pointloc.core.fileio import atomic_write_text
from pointloc.geometry.quaternion import UNIT_TOL, Pose, quat_canonicalize, quat_normalize

logger = logging.getLogger(__name__)

Split = Literal["train", "val", "test"]
SPLITS: tuple[Split, ...] = get_args(Split)
FIELD_COUNT = 10
HEADER_COMMENT = "# cloud_path,tx,ty,tz,qw,qx,qy,qz,sequence_tag,split"


@dataclass(frozen=True)
class ManifestRecord:
    cloud_path: Path
    pose: Pose
    sequence_tag: str
    split: Split

    @property
    def frame_id(self) -> str:
        return self.cloud_path.stem


@dataclass
class LoadReport:
    """Hygiene findings collected while loading a manifest."""

    warnings: list[str] = field(default_factory=list)
    normalized: int = 0
    canonicalized: int = 0
    duplicate_paths: list[str] = field(default_factory=list)

    def warn(self, message: str) -> None:
        logger.warning(message)
        self.warnings.append(message)


@dataclass
class DatasetManifest:
    """Records grouped by split; splits never share a sequence tag."""

    records: list[ManifestRecord]
    source: Path | None = None
    report: LoadReport = field(default_factory=LoadReport)

    def __post_init__(self) -> None:
        check_disjoint(self.records)

    def __len__(self) -> int:
        return len(self.records)

    def split(self, name: str) -> list[ManifestRecord]:
        if name not in SPLITS:
            raise ManifestError(f"Unknown split '{name}' (expected one of {', '.join(SPLITS)})")
        return [r for r in self.records if r.split == name]

    @property
    def frame_counts(self) -> dict[str, int]:
        counts = Counter(r.split for r in self.records)
        return {name: counts.get(name, 0) for name in SPLITS}

    def sequences(self, split: str) -> list[str]:
        return sorted({r.sequence_tag for r in self.split(split)})


def check_disjoint(records: Iterable[ManifestRecord]) -> None:
    """Raise ManifestError if any sequence tag appears in more than one split."""
    owner: dict[str, str] = {}
    for record in records:
        seen = owner.setdefault(record.sequence_tag, record.split)
        if seen != record.split:
            raise ManifestError(
                f"Sequence '{record.sequence_tag}' appears in both '{seen}' and '{record.split}'"
            )


def _parse_pose(values: list[str], line_no: int, report: LoadReport) -> Pose:
    try:
        numbers = [float(v) for v in values]
    except ValueError as exc:
        raise ManifestError(f"line {line_no}: {exc}") from exc
    if not all(math.isfinite(v) for v in numbers):
        raise ManifestError(f"line {line_no}: non-finite pose value")
    t = np.array(numbers[:3])
    q = np.array(numbers[3:])
    try:
        unit = quat_normalize(q)
    except DegenerateQuaternionError as exc:
        raise ManifestError(f"line {line_no}: {exc}") from exc
    if abs(float(np.linalg.norm(q)) - 1.0) > UNIT_TOL:
        report.normalized += 1
        report.warn(f"line {line_no}: quaternion norm {np.linalg.norm(q):.6f} normalized")
    else:
        unit = q
    if unit[0] < 0.0:
        report.canonicalized += 1
    return Pose(t=t, q=quat_canonicalize(unit))


def parse_manifest(text: str, base_dir: Path, source: str = "<manifest>") -> DatasetManifest:
    report = LoadReport()
    records: list[ManifestRecord] = []
    seen_paths: Counter[str] = Counter()

    for line_no, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        row = next(csv.reader([stripped], skipinitialspace=True))
        if len(row) != FIELD_COUNT:
            raise ManifestError(
                f"{source} line {line_no}: expected {FIELD_COUNT} fields, got {len(row)}"
            )
        cloud, *pose_values, tag, split = (value.strip() for value in row)
        if split not in SPLITS:
            raise ManifestError(f"{source} line {line_no}: unknown split '{split}'")
        if not tag:
            raise ManifestError(f"{source} line {line_no}: empty sequence tag")
        path = Path(cloud)
        if not path.is_absolute():
            path = base_dir / path
        seen_paths[str(path)] += 1
        if seen_paths[str(path)] == 2:
            report.duplicate_paths.append(str(path))
            report.warn(f"{source} line {line_no}: duplicate frame path {cloud}")
        records.append(
            ManifestRecord(
                cloud_path=path,
                pose=_parse_pose(pose_values, line_no, report),
                sequence_tag=tag,
                split=cast(Split, split),
            )
        )

    return DatasetManifest(records=records, source=Path(source), report=report)


def load_manifest(path: str | Path, check_files: bool = True) -> DatasetManifest:
    """
    Load a manifest, normalizing and canonicalizing every quaternion.

    Raises:
        ManifestError: On malformed lines, shared sequence tags or missing cloud files
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DatasetIOError(f"Cannot read manifest {path}: {exc}") from exc

    manifest = parse_manifest(text, path.parent.resolve(), str(path))
    if check_files:
        missing = [str(r.cloud_path) for r in manifest.records if not r.cloud_path.is_file()]
        if missing:
            raise ManifestError(
                f"{path}: {len(missing)} cloud file(s) missing, first {missing[0]}"
            )
    logger.info(
        f"Loaded manifest {path}: "
        + ", ".join(f"{name}={count}" for name, count in manifest.frame_counts.items())
    )
    return manifest


def format_manifest(records: Iterable[ManifestRecord], base_dir: Path | None = None) -> str:
    buffer = io.StringIO()
    buffer.write(HEADER_COMMENT + "\n")
    writer = csv.writer(buffer, lineterminator="\n")
    for record in records:
        path = record.cloud_path.resolve()
        if base_dir is not None and path.is_relative_to(base_dir):
            path = path.relative_to(base_dir)
        values = [*record.pose.t.tolist(), *record.pose.q.tolist()]
        writer.writerow(
            [path.as_posix(), *(repr(float(v)) for v in values), record.sequence_tag, record.split]
        )
    return buffer.getvalue()


def write_manifest(path: str | Path, records: Iterable[ManifestRecord]) -> Path:
    """Write records atomically; cloud paths under the manifest's directory are stored relative."""
    path = Path(path)
    rows = list(records)
    check_disjoint(rows)
    atomic_write_text(path, format_manifest(rows, path.parent.resolve()))
    logger.info(f"Wrote manifest {path} with {len(rows)} records")
    return path
