"""Zeros of random self-reciprocal polynomials, circular ensembles and Epstein zeta zeros."""

__version__ = "0.1.0"

from .errors import CircleZerosError  # noqa: E402
from .polycore import SelfReciprocalPoly, ZeroConfiguration, from_coefficients, from_roots  # noqa: E402
from .roots import circle_classify, find_roots  # noqa: E402
from .measures import DensityKind, log_density  # noqa: E402
from .samplers import EnsembleSpec, Model, SampleBatch, sample  # noqa: E402

__all__ = [
    "__version__",
    "CircleZerosError",
    "SelfReciprocalPoly",
    "ZeroConfiguration",
    "from_coefficients",
    "from_roots",
    "circle_classify",
    "find_roots",
    "DensityKind",
    "log_density",
    "EnsembleSpec",
    "Model",
    "SampleBatch",
    "sample",
]
