"""Curves, overlapping patch decompositions and partitions of unity."""

from fthms.geometry.boundary import ScatteringBoundary
from fthms.geometry.catalog import build_curve
from fthms.geometry.curves import ParametricCurve
from fthms.geometry.patches import PatchDecomposition, build_patch_decomposition

__all__ = [
    "ParametricCurve",
    "PatchDecomposition",
    "ScatteringBoundary",
    "build_curve",
    "build_patch_decomposition",
]
