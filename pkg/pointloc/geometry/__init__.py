"""Quaternion and pose algebra."""

from pointloc.geometry.quaternion import (
    LogPose,
    Pose,
    quat_canonicalize,
    quat_conjugate,
    quat_exp,
    quat_from_axis_angle,
    quat_log,
    quat_multiply,
    quat_normalize,
    quat_rotate,
    rotation_error_deg,
    translation_error_m,
)

__all__ = [
    "LogPose",
    "Pose",
    "quat_canonicalize",
    "quat_conjugate",
    "quat_exp",
    "quat_from_axis_angle",
    "quat_log",
    "quat_multiply",
    "quat_normalize",
    "quat_rotate",
    "rotation_error_deg",
    "translation_error_m",
]
