"""PointLoc: 6-DoF pose regression from single LiDAR point clouds."""

__version__ = "0.3.1"
__author__ = "PointLoc Team"
__description__ = "PointNet-style LiDAR relocalization with self-attention"
