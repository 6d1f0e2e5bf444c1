"""Spectral solvers for traveling waves of the one-phase Muskat problem on a strip."""

from .errors import (
    BlowupDetected,
    CompatibilityViolation,
    ContractionFailure,
    DiffeoViolation,
    MuskatError,
    NoConvergence,
    NonzeroMean,
    ResidualTooLarge,
    SpecMismatch,
    VersionMismatch,
)
from .spectral import DomainSpec, StripField, SurfaceField

__version__ = "0.1.0"

__all__ = [
    "BlowupDetected",
    "CompatibilityViolation",
    "ContractionFailure",
    "DiffeoViolation",
    "DomainSpec",
    "MuskatError",
    "NoConvergence",
    "NonzeroMean",
    "ResidualTooLarge",
    "SpecMismatch",
    "StripField",
    "SurfaceField",
    "VersionMismatch",
]
