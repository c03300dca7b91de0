"""Pytest configuration and shared fixtures."""

import os

import numpy as np
import pytest

# Keep CLI runs from dropping metrics files next to test outputs unless asked
os.environ.setdefault("POINTLOC_ENABLE_METRICS", "false")

from pointloc.data.synthetic import build_synthetic_dataset  # noqa: E402
from pointloc.model.params import init_params  # noqa: E402
from pointloc.sampling.kernels import PointCloud  # noqa: E402
from pointloc.schemas.model import ModelScale  # noqa: E402


def spread_cloud(n: int, seed: int, extent: tuple[float, float, float] = (20.0, 20.0, 10.0)):
    """Tie-free cloud sparse enough that no first-layer ball overflows its sample count."""
    rng = np.random.default_rng(seed)
    return PointCloud(rng.uniform(0.0, 1.0, (n, 3)) * np.asarray(extent))


@pytest.fixture
def tiny_scale() -> ModelScale:
    """Provide the tiny model preset."""
    return ModelScale.preset("tiny")


@pytest.fixture
def tiny_params(tiny_scale):
    """Provide freshly initialized tiny-scale parameters."""
    return init_params(0, tiny_scale)


@pytest.fixture
def tiny_cloud(tiny_scale) -> PointCloud:
    """Provide a tie-free cloud with the tiny scale's input size."""
    return spread_cloud(tiny_scale.n_input, seed=7)


@pytest.fixture(scope="session")
def synthetic_manifest(tmp_path_factory):
    """Provide a small synthetic dataset (16 frames, coarse scans) shared by the session."""
    out = tmp_path_factory.mktemp("synthetic")
    return build_synthetic_dataset(n_poses=16, seed=3, out_dir=out, beams=8, azimuth_steps=90)


def pytest_addoption(parser):
    parser.addoption(
        "--runslow", action="store_true", default=False, help="Run long acceptance tests"
    )


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)
