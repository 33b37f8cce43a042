"""Core Fock-space components: states, mode transforms, post-selection and the permanent oracle."""

from .fock import FockState, FockStateError, ModeRegistry, Occupation, ZeroNormError
from .linops import ExpansionEngine, ModeTransform, TransformError, beam_splitter, symmetric_multiport
from .measure import ProjectionError, ProjectionResult, project_beam_counts, project_vacuum
from .oracle import DenseBasis, OracleError, PermanentEngine, dense_apply, permanent

__all__ = [
    "FockState",
    "FockStateError",
    "ModeRegistry",
    "Occupation",
    "ZeroNormError",
    "ExpansionEngine",
    "ModeTransform",
    "TransformError",
    "beam_splitter",
    "symmetric_multiport",
    "ProjectionError",
    "ProjectionResult",
    "project_beam_counts",
    "project_vacuum",
    "DenseBasis",
    "OracleError",
    "PermanentEngine",
    "dense_apply",
    "permanent",
]
