"""Moment estimates for linear and chaos-expanded SPDEs driven by Lévy
space-time white noise with a spatially colored covariance.

The package is organised by layer: ``measure`` (Lévy jump measures),
``kernels`` (coloration kernels and their spectral measures), ``operators``
(heat and wave Green's functions), ``prm`` (Poisson random measure sampling),
``linear`` (the linear solution and its moment envelopes), ``chaos`` (the
chaos series and its certificates) and ``cli``.
"""

from .errors import (
    ConfigError,
    DivergentIntegral,
    DomainError,
    GridTooCoarse,
    LevySPDEError,
    Overflow,
    QuadratureFail,
    SupportError,
    TruncationError,
    Unsupported,
)
from .kernels import ColorationKernel
from .measure import LevyMeasure
from .operators import GreenOperator
from .prm import Box

__version__ = "0.1.0"

__all__ = [
    "Box",
    "ColorationKernel",
    "ConfigError",
    "DivergentIntegral",
    "DomainError",
    "GreenOperator",
    "GridTooCoarse",
    "LevyMeasure",
    "LevySPDEError",
    "Overflow",
    "QuadratureFail",
    "SupportError",
    "TruncationError",
    "Unsupported",
]
