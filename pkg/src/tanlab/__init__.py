"""Numerical laboratory for the tangent family ``f(z) = lam * tan(z)``."""

__version__ = "0.1.0"

from .core import POLE, Polyline, TangentMap, evaluate, lift_curve  # noqa: E402
from .rotation import continued_fraction, multiplier, named_quadratic  # noqa: E402
from .scan import ScanConfig, classify_point, render, scan_dynamical  # noqa: E402
from .siegel import (  # noqa: E402
    SiegelConfig,
    Verdict,
    conformal_radius,
    linearizer,
    unboundedness_indicators,
)

__all__ = [
    "POLE",
    "Polyline",
    "ScanConfig",
    "SiegelConfig",
    "TangentMap",
    "Verdict",
    "classify_point",
    "conformal_radius",
    "continued_fraction",
    "evaluate",
    "lift_curve",
    "linearizer",
    "multiplier",
    "named_quadratic",
    "render",
    "scan_dynamical",
    "unboundedness_indicators",
]
