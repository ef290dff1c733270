"""Bound states of the Hellmann potential and of its exactly solvable substituted variant."""
from .model import (
    ConvergenceFailure,
    GridTooCoarse,
    HellmannError,
    InvalidParameters,
    ModelKind,
    NoBoundState,
    PotentialParams,
    ScaledParams,
    StateLabel,
    continuum_threshold,
    potential_value,
    to_scaled,
)

__version__ = "0.1.0"
