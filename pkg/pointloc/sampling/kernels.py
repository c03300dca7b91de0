"""Point-selection kernels used by every set-abstraction layer."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from pointloc.core.exceptions import (
    DimensionError,
    EmptyNeighborhoodError,
    InvalidArgumentError,
    NonFiniteError,
)

logger = logging.getLogger(__name__)

# Rows of the center/point distance matrix evaluated at once by ball_query.
_BALL_QUERY_CHUNK = 64


def as_points(points: ArrayLike) -> np.ndarray:
    """Validate an N x 3 finite coordinate array with N >= 1."""
    arr = np.asarray(points, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise DimensionError(f"Point array must be N x 3, got {arr.shape}")
    if arr.shape[0] < 1:
        raise InvalidArgumentError("Point cloud is empty")
    if not np.isfinite(arr).all():
        raise NonFiniteError("Point cloud contains non-finite coordinates")
    return arr


@dataclass(frozen=True)
class PointCloud:
    """N x 3 sensor-frame coordinates in meters."""

    points: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "points", as_points(self.points))

    def __len__(self) -> int:
        return int(self.points.shape[0])


@dataclass(frozen=True)
class NeighborIndex:
    """Ball-query result: per-center index rows padded with the first valid index."""

    centers: np.ndarray
    indices: np.ndarray
    valid_counts: np.ndarray


def random_downsample(cloud: PointCloud, n_target: int, seed: int) -> PointCloud:
    """
    Resample a cloud to exactly n_target points.

    Larger clouds are sampled uniformly without replacement. Smaller clouds keep
    every point and draw the remainder uniformly with replacement.
    """
    if n_target < 1:
        raise InvalidArgumentError(f"n_target must be >= 1, got {n_target}")
    n = len(cloud)
    if n == n_target:
        return cloud
    rng = np.random.default_rng(seed)
    if n > n_target:
        idx = np.sort(rng.choice(n, size=n_target, replace=False))
    else:
        extra = rng.integers(0, n, size=n_target - n)
        idx = np.concatenate([np.arange(n), extra])
    return PointCloud(cloud.points[idx])


def farthest_point_sample(points: ArrayLike, m: int) -> np.ndarray:
    """
    Greedy max-min selection of m indices, in pick order.

    The first pick is the point farthest from the centroid. Picks are distinct, so
    coincident points are taken one at a time; ties go to the lowest unpicked index.
    """
    pts = as_points(points)
    n = pts.shape[0]
    if not 1 <= m <= n:
        raise InvalidArgumentError(f"Cannot sample {m} points from a cloud of {n}")

    centroid = pts.mean(axis=0)
    first = int(np.argmax(((pts - centroid) ** 2).sum(axis=1)))
    picks = np.empty(m, dtype=np.int64)
    picks[0] = first
    min_dist = ((pts - pts[first]) ** 2).sum(axis=1)
    min_dist[first] = -1.0
    for i in range(1, m):
        nxt = int(np.argmax(min_dist))
        picks[i] = nxt
        min_dist = np.minimum(min_dist, ((pts - pts[nxt]) ** 2).sum(axis=1))
        min_dist[nxt] = -1.0
    return picks


def ball_query(points: ArrayLike, centers: ArrayLike, radius: float, k: int) -> NeighborIndex:
    """
    Up to k in-radius point indices per center, in ascending index order.

    Raises:
        EmptyNeighborhoodError: If some center has no point within the radius
    """
    if radius <= 0:
        raise InvalidArgumentError(f"radius must be positive, got {radius}")
    if k < 1:
        raise InvalidArgumentError(f"k must be >= 1, got {k}")
    pts = as_points(points)
    ctr = as_points(centers)
    n = pts.shape[0]
    r2 = radius * radius

    indices = np.empty((ctr.shape[0], k), dtype=np.int64)
    counts = np.empty(ctr.shape[0], dtype=np.int64)
    for start in range(0, ctr.shape[0], _BALL_QUERY_CHUNK):
        block = ctr[start : start + _BALL_QUERY_CHUNK]
        d2 = ((block[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
        inside = d2 <= r2
        found = inside.sum(axis=1)
        empty = np.flatnonzero(found == 0)
        if empty.size:
            raise EmptyNeighborhoodError(start + int(empty[0]), radius)

        # Out-of-radius slots get the sentinel n, which sorts after every real index.
        order = np.where(inside, np.arange(n)[None, :], n)
        if k < n:
            order = np.partition(order, k - 1, axis=1)[:, :k]
        order = np.sort(order, axis=1)[:, :k]
        if order.shape[1] < k:
            order = np.pad(order, ((0, 0), (0, k - order.shape[1])), constant_values=n)
        order = np.where(order == n, order[:, :1], order)

        indices[start : start + block.shape[0]] = order
        counts[start : start + block.shape[0]] = np.minimum(found, k)

    return NeighborIndex(centers=ctr, indices=indices, valid_counts=counts)


def relative_offsets(points: ArrayLike, nbr: NeighborIndex) -> np.ndarray:
    """M x K x 3 offsets x_idx - center_j."""
    pts = np.asarray(points, dtype=np.float64)
    if nbr.indices.size and (nbr.indices.min() < 0 or nbr.indices.max() >= pts.shape[0]):
        raise DimensionError(f"Neighbor index out of range for {pts.shape[0]} points")
    return pts[nbr.indices] - nbr.centers[:, None, :]


def group_relative(
    points: ArrayLike, features: ArrayLike | None, nbr: NeighborIndex
) -> np.ndarray:
    """
    Group neighborhoods as concat(x_idx - center_j, F_idx).

    Returns:
        M x K x (3 + C) array, or M x K x 3 without features
    """
    offsets = relative_offsets(points, nbr)
    if features is None:
        return offsets
    feats = np.asarray(features, dtype=np.float64)
    if feats.ndim != 2 or feats.shape[0] != np.asarray(points).shape[0]:
        raise DimensionError(f"Features {feats.shape} do not match {np.asarray(points).shape}")
    return np.concatenate([offsets, feats[nbr.indices]], axis=-1)
