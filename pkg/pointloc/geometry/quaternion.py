"""Quaternion and pose algebra.

Quaternions are stored scalar-first as (u, v1, v2, v3). The log map follows
log q = (v / |v|) * arccos(u), so a log-quaternion has norm equal to half the
rotation angle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from pointloc.core.exceptions import (
    DegenerateQuaternionError,
    DimensionError,
    InvalidArgumentError,
    OutOfRangeError,
)

NORM_EPS = 1e-12
UNIT_TOL = 1e-9


def _vec(x: ArrayLike, n: int, what: str) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.shape != (n,):
        raise DimensionError(f"{what} must have shape ({n},), got {arr.shape}")
    return arr


def quat_normalize(q: ArrayLike) -> np.ndarray:
    """Scale a quaternion to unit norm."""
    arr = _vec(q, 4, "quaternion")
    norm = float(np.linalg.norm(arr))
    if not norm > NORM_EPS:
        raise DegenerateQuaternionError(f"Quaternion norm {norm:.3e} is too small to normalize")
    return arr / norm


def quat_canonicalize(q: ArrayLike) -> np.ndarray:
    """Return q if its scalar part is non-negative, else -q."""
    arr = _vec(q, 4, "quaternion")
    return -arr if arr[0] < 0.0 else arr.copy()


def quat_log(q: ArrayLike) -> np.ndarray:
    """Log map of a unit quaternion: (v / |v|) * arccos(u), zero when v vanishes."""
    arr = _vec(q, 4, "quaternion")
    v = arr[1:]
    vnorm = float(np.linalg.norm(v))
    if vnorm == 0.0:
        return np.zeros(3)
    u = min(1.0, max(-1.0, float(arr[0])))
    return (v / vnorm) * math.acos(u)


def quat_exp(w: ArrayLike, strict: bool = True) -> np.ndarray:
    """
    Inverse of quat_log: (cos|w|, (w / |w|) sin|w|).

    Args:
        w: Log-quaternion
        strict: Reject |w| > pi (raw network output may be converted with strict=False)
    """
    arr = _vec(w, 3, "log-quaternion")
    theta = float(np.linalg.norm(arr))
    if strict and theta > math.pi:
        raise OutOfRangeError(f"|w| = {theta:.6f} exceeds pi")
    if theta == 0.0:
        return np.array([1.0, 0.0, 0.0, 0.0])
    return np.concatenate([[math.cos(theta)], (arr / theta) * math.sin(theta)])


def quat_multiply(a: ArrayLike, b: ArrayLike) -> np.ndarray:
    """Hamilton product a * b."""
    a0, a1, a2, a3 = _vec(a, 4, "quaternion")
    b0, b1, b2, b3 = _vec(b, 4, "quaternion")
    return np.array(
        [
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        ]
    )


def quat_conjugate(q: ArrayLike) -> np.ndarray:
    arr = _vec(q, 4, "quaternion")
    return np.array([arr[0], -arr[1], -arr[2], -arr[3]])


def quat_from_axis_angle(axis: ArrayLike, angle: float) -> np.ndarray:
    """Unit quaternion rotating by angle (radians) about axis."""
    ax = _vec(axis, 3, "axis")
    norm = float(np.linalg.norm(ax))
    if norm < NORM_EPS:
        raise InvalidArgumentError("Rotation axis must be non-zero")
    half = 0.5 * angle
    return np.concatenate([[math.cos(half)], (ax / norm) * math.sin(half)])


def quat_rotate(q: ArrayLike, vectors: ArrayLike) -> np.ndarray:
    """
    Rotate one vector (3,) or many (N, 3) by a unit quaternion.

    Uses v' = v + 2u (r x v) + 2 r x (r x v) with r the vector part.
    """
    arr = _vec(q, 4, "quaternion")
    v = np.asarray(vectors, dtype=np.float64)
    if v.shape[-1] != 3:
        raise DimensionError(f"vectors must end in 3 coordinates, got {v.shape}")
    u, r = arr[0], arr[1:]
    cross = np.cross(r, v)
    return v + 2.0 * u * cross + 2.0 * np.cross(r, cross)


def rotation_error_deg(q: ArrayLike, q_hat: ArrayLike) -> float:
    """
    Geodesic angle 2 * arccos(|<q, q_hat>|) in degrees, in [0, 180].

    Evaluated as an atan2 of the relative rotation, which is exactly zero for q_hat = +-q.
    """
    rel = quat_multiply(quat_conjugate(q_hat), q)
    return math.degrees(2.0 * math.atan2(float(np.linalg.norm(rel[1:])), abs(float(rel[0]))))


def translation_error_m(t: ArrayLike, t_hat: ArrayLike) -> float:
    """Euclidean distance between two translations."""
    return float(np.linalg.norm(_vec(t, 3, "translation") - _vec(t_hat, 3, "translation")))


@dataclass(frozen=True)
class Pose:
    """
    World-frame pose: q rotates sensor-frame vectors into the world frame, then t translates.
    """

    t: np.ndarray
    q: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "t", _vec(self.t, 3, "translation").copy())
        q = _vec(self.q, 4, "quaternion").copy()
        if abs(float(np.linalg.norm(q)) - 1.0) > UNIT_TOL:
            raise InvalidArgumentError(f"Pose quaternion is not unit norm: {q}")
        object.__setattr__(self, "q", q)

    @classmethod
    def from_raw(cls, t: ArrayLike, q: ArrayLike) -> Pose:
        """Normalize and canonicalize q before building the pose."""
        return cls(t=np.asarray(t, dtype=np.float64), q=quat_canonicalize(quat_normalize(q)))

    @property
    def is_canonical(self) -> bool:
        return bool(self.q[0] >= 0.0)

    def to_log(self) -> LogPose:
        return LogPose(t=self.t, w=quat_log(quat_canonicalize(self.q)))

    def sensor_to_world(self, points: ArrayLike) -> np.ndarray:
        return quat_rotate(self.q, points) + self.t

    def world_to_sensor(self, points: ArrayLike) -> np.ndarray:
        p = np.asarray(points, dtype=np.float64) - self.t
        return quat_rotate(quat_conjugate(self.q), p)


@dataclass(frozen=True)
class LogPose:
    """Regression target: translation plus log-quaternion, six numbers in total."""

    t: np.ndarray
    w: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "t", _vec(self.t, 3, "translation").copy())
        object.__setattr__(self, "w", _vec(self.w, 3, "log-quaternion").copy())

    def to_pose(self, strict: bool = True) -> Pose:
        return Pose(t=self.t, q=quat_exp(self.w, strict=strict))

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.t, self.w])
