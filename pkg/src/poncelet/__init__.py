"""Poncelet triangle families in a confocal pair: spatio-temporal surface,
curvature, critical points and the links swept by notable points."""

from .confocal import ConfocalPair, pair_from_caustic, pair_from_outer, triangle_at
from .errors import DomainError, NumericError

__all__ = [
    "ConfocalPair",
    "DomainError",
    "NumericError",
    "pair_from_caustic",
    "pair_from_outer",
    "triangle_at",
]
__version__ = "0.1.0"
