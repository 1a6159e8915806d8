"""Verification engine for explicit gradient solutions of the Navier-Stokes
equations on hyperbolic surfaces."""

__version__ = "0.1.0"

from .geometry import ChartPoint, HyperbolicModel, ModelKind, build_polar_grid, distance, integrate  # noqa: E402
from .harmonic import FourierBoundaryData, extend, extend_disk, extend_warped  # noqa: E402
from .nsverify import ExponentialProfile, CustomProfile, SolutionFamily, Variant  # noqa: E402

__all__ = [
    "ChartPoint",
    "CustomProfile",
    "ExponentialProfile",
    "FourierBoundaryData",
    "HyperbolicModel",
    "ModelKind",
    "SolutionFamily",
    "Variant",
    "build_polar_grid",
    "distance",
    "extend",
    "extend_disk",
    "extend_warped",
    "integrate",
]
