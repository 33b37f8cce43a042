"""Measurement module.

Post-selection by ideal photon-number-resolving detectors: vacuum heralding
on detector modes and exact photon-count projection on beams. Projection is
term filtering, since the Fock basis diagonalizes photon number.
"""

import logging
import math
from collections import defaultdict
from collections.abc import Callable, Sequence
from dataclasses import dataclass

from ..config import PROJECTION_INPUT_TOLERANCE
from .fock import FockState, FockStateError, Occupation
from .oracle import DenseBasis

logger = logging.getLogger(__name__)


class ProjectionError(Exception):
    """Base exception for post-selection errors."""
    pass


@dataclass(frozen=True)
class ProjectionResult:
    """Outcome of a post-selection.

    Attributes:
        state: Normalized projected state, or the zero state.
        probability: Probability of the selected outcome.
    """
    state: FockState
    probability: float

    @property
    def succeeded(self) -> bool:
        """True when the outcome has nonzero probability."""
        return self.probability > 0.0


def _require_normalized(state: FockState) -> None:
    weight = state.norm_squared()
    if abs(weight - 1.0) > PROJECTION_INPUT_TOLERANCE:
        raise ProjectionError(
            f"Projection needs a normalized input, got norm^2 = {weight:.12g}"
        )


def _project(state: FockState, keep: Callable[[Occupation], bool]) -> ProjectionResult:
    _require_normalized(state)
    kept = {o: a for o, a in state if keep(o)}
    probability = math.fsum(abs(a) ** 2 for a in kept.values())
    if not kept:
        return ProjectionResult(FockState.zero(state.registry), 0.0)
    projected, _ = FockState(state.registry, kept, state.tolerance).normalize()
    return ProjectionResult(projected, min(probability, 1.0))


def project_vacuum(state: FockState, modes: Sequence[int]) -> ProjectionResult:
    """Keep terms with no photons in any of the given modes.

    Args:
        state: Normalized input state.
        modes: Detector mode indices.

    Returns:
        ProjectionResult with the renormalized state and its probability.

    Raises:
        ProjectionError: If the input is not normalized or a mode is invalid.
    """
    size = len(state.registry)
    bad = [m for m in modes if not 0 <= m < size]
    if bad:
        raise ProjectionError(f"Mode indices {bad} out of range for {size} modes")
    detected = tuple(modes)
    result = _project(state, lambda o: all(o[m] == 0 for m in detected))
    logger.debug(f"Vacuum projection on {len(detected)} modes: p={result.probability:.6g}")
    return result


def _beam_modes(state: FockState, beam: str) -> list[int]:
    try:
        return state.registry.beam_modes(beam)
    except FockStateError as e:
        raise ProjectionError(str(e)) from e


def project_beam_counts(
    state: FockState,
    constraints: Sequence[tuple[str, int]],
) -> ProjectionResult:
    """Keep terms with an exact total photon count (H + V) on each listed beam.

    Args:
        state: Normalized input state.
        constraints: (beam, count) pairs.

    Returns:
        ProjectionResult with the renormalized state and its probability.

    Raises:
        ProjectionError: If the input is not normalized or a beam is unknown.
    """
    groups = [(_beam_modes(state, beam), int(count)) for beam, count in constraints]
    result = _project(
        state,
        lambda o: all(sum(o[m] for m in modes) == count for modes, count in groups),
    )
    logger.debug(f"Coincidence projection {list(constraints)}: p={result.probability:.6g}")
    return result


def outcome_distribution(
    state: FockState,
    beams: Sequence[str],
) -> dict[tuple[int, ...], float]:
    """Probabilities of joint photon-count tuples on the listed beams.

    Args:
        state: Normalized input state.
        beams: Monitored beams, in tuple order.

    Returns:
        Map from count tuple to probability, in sorted tuple order. Every tuple
        with the same monitored total as an observed outcome is listed, so
        forbidden outcomes appear with probability 0.
    """
    _require_normalized(state)
    groups = [_beam_modes(state, beam) for beam in beams]
    weights: dict[tuple[int, ...], list[float]] = defaultdict(list)
    for occupation, amplitude in state:
        key = tuple(sum(occupation[m] for m in modes) for modes in groups)
        weights[key].append(abs(amplitude) ** 2)
    if groups:
        for total in {sum(key) for key in weights}:
            for counts in DenseBasis(len(groups), total).states:
                weights.setdefault(tuple(counts), [])
    return {key: math.fsum(weights[key]) for key in sorted(weights)}
