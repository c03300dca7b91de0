"""Cloud files, manifests, synthetic scenes and per-frame datasets."""

from pointloc.data.cloud_io import load_cloud, save_cloud
from pointloc.data.dataset import Frame, FrameDataset
from pointloc.data.manifest import (
    DatasetManifest,
    LoadReport,
    ManifestRecord,
    load_manifest,
    write_manifest,
)
from pointloc.data.scene import Box, SyntheticScene, generate_scene, simulate_scan
from pointloc.data.synthetic import build_synthetic_dataset

__all__ = [
    "Box",
    "DatasetManifest",
    "Frame",
    "FrameDataset",
    "LoadReport",
    "ManifestRecord",
    "SyntheticScene",
    "build_synthetic_dataset",
    "generate_scene",
    "load_cloud",
    "load_manifest",
    "save_cloud",
    "simulate_scan",
    "write_manifest",
]
