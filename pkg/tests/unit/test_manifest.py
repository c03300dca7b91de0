"""Unit tests for dataset manifests."""

import numpy as np
import pytest

from pointloc.core.exceptions import DatasetIOError, ManifestError
from pointloc.data.manifest import (
    DatasetManifest,
    ManifestRecord,
    load_manifest,
    parse_manifest,
    write_manifest,
)
from pointloc.geometry.quaternion import Pose


def row(path: str, tag: str, split: str, q: str = "1,0,0,0", t: str = "0,0,0") -> str:
    return f"{path},{t},{q},{tag},{split}"


def table_like_manifest() -> str:
    lines = ["# cloud_path,tx,ty,tz,qw,qx,qy,qz,sequence_tag,split", ""]
    for seq in range(1, 9):
        split = "train" if seq <= 4 else "test"
        for frame in range(2):
            lines.append(row(f"seq{seq}/f{frame}.pcld", f"seq-{seq:02d}", split))
    return "\n".join(lines) + "\n"


class TestParseManifest:
    """Tests for manifest parsing and hygiene."""

    def test_splits_by_sequence(self, tmp_path) -> None:
        manifest = parse_manifest(table_like_manifest(), tmp_path)
        assert len(manifest.sequences("train")) == 4
        assert len(manifest.sequences("test")) == 4
        assert manifest.frame_counts == {"train": 8, "val": 0, "test": 8}

    def test_relative_paths_resolve(self, tmp_path) -> None:
        manifest = parse_manifest(row("a/b.pcld", "s", "train"), tmp_path)
        record = manifest.records[0]
        assert record.cloud_path == tmp_path / "a" / "b.pcld"
        assert record.frame_id == "b"

    def test_duplicate_path_kept_with_warning(self, tmp_path) -> None:
        text = "\n".join([row("x.pcld", "s", "train"), row("x.pcld", "s", "train")])
        manifest = parse_manifest(text, tmp_path)
        assert len(manifest) == 2
        assert len(manifest.report.duplicate_paths) == 1
        assert any("duplicate" in w for w in manifest.report.warnings)

    def test_non_unit_quaternion_normalized(self, tmp_path) -> None:
        manifest = parse_manifest(row("x.pcld", "s", "train", q="2,0,0,0"), tmp_path)
        assert manifest.records[0].pose.q.tolist() == [1.0, 0.0, 0.0, 0.0]
        assert manifest.report.normalized == 1
        assert manifest.report.warnings

    def test_negative_scalar_canonicalized(self, tmp_path) -> None:
        manifest = parse_manifest(row("x.pcld", "s", "train", q="-0.5,0.5,0.5,0.5"), tmp_path)
        assert manifest.records[0].pose.q.tolist() == [0.5, -0.5, -0.5, -0.5]
        assert manifest.report.canonicalized == 1
        assert manifest.report.normalized == 0

    def test_shared_sequence_rejected(self, tmp_path) -> None:
        text = "\n".join([row("a.pcld", "s", "train"), row("b.pcld", "s", "test")])
        with pytest.raises(ManifestError, match="both"):
            parse_manifest(text, tmp_path)

    @pytest.mark.parametrize(
        "line",
        [
            "a.pcld,0,0,0,1,0,0,0,s",
            row("a.pcld", "s", "holdout"),
            row("a.pcld", "", "train"),
            row("a.pcld", "s", "train", t="0,zero,0"),
            row("a.pcld", "s", "train", t="0,nan,0"),
            row("a.pcld", "s", "train", q="0,0,0,0"),
        ],
    )
    def test_malformed_lines(self, tmp_path, line: str) -> None:
        with pytest.raises(ManifestError):
            parse_manifest(line, tmp_path)

    def test_unknown_split_lookup(self, tmp_path) -> None:
        with pytest.raises(ManifestError):
            parse_manifest(row("a.pcld", "s", "train"), tmp_path).split("holdout")


class TestManifestFiles:
    """Tests for loading and writing manifest files."""

    def test_missing_clouds_detected(self, tmp_path) -> None:
        path = tmp_path / "manifest.csv"
        path.write_text(row("absent.pcld", "s", "train") + "\n", encoding="utf-8")
        with pytest.raises(ManifestError, match="missing"):
            load_manifest(path)
        assert len(load_manifest(path, check_files=False)) == 1

    def test_unreadable_manifest(self, tmp_path) -> None:
        with pytest.raises(DatasetIOError):
            load_manifest(tmp_path / "absent.csv")

    def test_write_then_load_exact(self, tmp_path) -> None:
        rng = np.random.default_rng(0)
        records = []
        for i in range(5):
            q = rng.normal(size=4)
            pose = Pose.from_raw(rng.uniform(-5, 5, size=3), q)
            records.append(
                ManifestRecord(
                    cloud_path=tmp_path / "clouds" / f"f{i}.pcld",
                    pose=pose,
                    sequence_tag="seq-a" if i < 3 else "seq-b",
                    split="train" if i < 3 else "test",
                )
            )
        path = write_manifest(tmp_path / "manifest.csv", records)
        assert "clouds/f0.pcld" in path.read_text(encoding="utf-8")
        loaded = load_manifest(path, check_files=False)
        for before, after in zip(records, loaded.records, strict=True):
            np.testing.assert_array_equal(after.pose.t, before.pose.t)
            np.testing.assert_array_equal(after.pose.q, before.pose.q)
            assert after.split == before.split

    def test_write_rejects_shared_sequence(self, tmp_path) -> None:
        pose = Pose.from_raw([0, 0, 0], [1, 0, 0, 0])
        records = [
            ManifestRecord(tmp_path / "a.pcld", pose, "s", "train"),
            ManifestRecord(tmp_path / "b.pcld", pose, "s", "val"),
        ]
        with pytest.raises(ManifestError):
            write_manifest(tmp_path / "manifest.csv", records)
        assert not (tmp_path / "manifest.csv").exists()

    def test_direct_construction_checks_disjointness(self, tmp_path) -> None:
        pose = Pose.from_raw([0, 0, 0], [1, 0, 0, 0])
        with pytest.raises(ManifestError):
            DatasetManifest(
                records=[
                    ManifestRecord(tmp_path / "a.pcld", pose, "s", "train"),
                    ManifestRecord(tmp_path / "b.pcld", pose, "s", "test"),
                ]
            )
