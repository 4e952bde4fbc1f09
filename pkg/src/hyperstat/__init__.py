"""Statistics on real hyperbolic space built on its strong negative type."""

from . import crofton, energetics, geometry, metrics, negtype
from .energetics import PermutationTestResult, Sample
from .errors import (
    DegenerateInputError,
    DomainError,
    HyperstatError,
    NumericError,
    ParseError,
    PreconditionError,
)
from .geometry import HyperboloidPoint, Isometry, KleinPoint, PoincarePoint
from .negtype import DistanceMatrix, NegTypeReport, Verdict

__version__ = "0.1.0"

__all__ = [
    "crofton",
    "energetics",
    "geometry",
    "metrics",
    "negtype",
    "Sample",
    "PermutationTestResult",
    "HyperboloidPoint",
    "KleinPoint",
    "PoincarePoint",
    "Isometry",
    "DistanceMatrix",
    "NegTypeReport",
    "Verdict",
    "HyperstatError",
    "DomainError",
    "PreconditionError",
    "DegenerateInputError",
    "ParseError",
    "NumericError",
]
