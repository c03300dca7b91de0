"""Test suite for PointLoc."""
