"""Target state module.

Constructors for the named polarization-entangled states the schemes aim
at, and the fidelity used to compare simulation output against them. Each
target is built on its own registry; `fidelity` aligns registries by label.
"""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

from .config import NORMALIZATION_TOLERANCE, TELECLONING_OUTPUT_BEAMS
from .core.fock import FockState, FockStateError, ModeRegistry

logger = logging.getLogger(__name__)


class TargetStateError(Exception):
    """Base exception for target state errors."""
    pass


@dataclass(frozen=True)
class NamedState:
    """A normalized reference state.

    Attributes:
        name: Identifier (epr, spin1-four-photon, spin-j, telecloning).
        state: The normalized FockState.
    """
    name: str
    state: FockState

    def __post_init__(self) -> None:
        if not self.state.is_normalized(NORMALIZATION_TOLERANCE):
            raise TargetStateError(f"Target {self.name!r} is not normalized")

    @property
    def registry(self) -> ModeRegistry:
        """Registry the target lives on."""
        return self.state.registry


def _distinct(beams: Sequence[str], expected: int) -> list[str]:
    labels = [str(b) for b in beams]
    if len(labels) != expected or len(set(labels)) != expected:
        raise TargetStateError(f"Need {expected} distinct beams, got {labels}")
    return labels


def epr_pair(beam_a: str, beam_b: str) -> NamedState:
    """(|H_a V_b> + |V_a H_b>) / sqrt(2).

    Raises:
        TargetStateError: If the beams coincide.
    """
    a, b = _distinct([beam_a, beam_b], 2)
    registry = ModeRegistry.from_beams([a, b])
    amplitude = 1 / math.sqrt(2)
    state = FockState.from_labels(
        registry,
        [
            ({(a, "H"): 1, (b, "V"): 1}, amplitude),
            ({(a, "V"): 1, (b, "H"): 1}, amplitude),
        ],
    )
    return NamedState("epr", state)


def spin_j_state(n: int, beam_1: str = "1", beam_2: str = "2") -> NamedState:
    """Two maximally entangled spin-N/2 systems carried by 2N photons.

    The state is sum_m |m H, (N-m) V>_1 |(N-m) H, m V>_2 / sqrt(N + 1),
    normalized over its N + 1 equal-weight terms.

    Args:
        n: Number of photon pairs N >= 1.
        beam_1: First beam.
        beam_2: Second beam.

    Raises:
        TargetStateError: If n < 1 or the beams coincide.
    """
    if n < 1:
        raise TargetStateError(f"Spin-j state needs N >= 1, got {n}")
    a, b = _distinct([beam_1, beam_2], 2)
    registry = ModeRegistry.from_beams([a, b])
    amplitude = 1 / math.sqrt(n + 1)
    state = FockState.from_labels(
        registry,
        [
            ({(a, "H"): m, (a, "V"): n - m, (b, "H"): n - m, (b, "V"): m}, amplitude)
            for m in range(n + 1)
        ],
    )
    return NamedState("spin1-four-photon" if n == 2 else "spin-j", state)


def telecloning_state(beams: Sequence[str] = TELECLONING_OUTPUT_BEAMS) -> NamedState:
    """The four-qubit telecloning state on beams 1'..4'.

    (|HHVV> + |VVHH>) / sqrt(3) + (|HV> + |VH>)(|HV> + |VH>) / (2 sqrt(3)),
    one photon per beam.

    Raises:
        TargetStateError: If the four beams are not distinct.
    """
    b1, b2, b3, b4 = _distinct(beams, 4)
    registry = ModeRegistry.from_beams([b1, b2, b3, b4])
    major = 1 / math.sqrt(3)
    minor = 1 / (2 * math.sqrt(3))

    def ket(p1: str, p2: str, p3: str, p4: str) -> dict[tuple[str, str], int]:
        return {(b1, p1): 1, (b2, p2): 1, (b3, p3): 1, (b4, p4): 1}

    state = FockState.from_labels(
        registry,
        [
            (ket("H", "H", "V", "V"), major),
            (ket("V", "V", "H", "H"), major),
            (ket("H", "V", "H", "V"), minor),
            (ket("H", "V", "V", "H"), minor),
            (ket("V", "H", "H", "V"), minor),
            (ket("V", "H", "V", "H"), minor),
        ],
    )
    return NamedState("telecloning", state)


def fidelity(a: FockState, b: FockState) -> float:
    """Return |<a|b>|^2.

    When the registries differ but one's labels are a subset of the other's,
    the smaller state is embedded by label (extra modes in vacuum).

    Raises:
        TargetStateError: If the registries cannot be aligned.
    """
    if a.registry != b.registry:
        try:
            if len(a.registry) <= len(b.registry):
                a = a.embed(b.registry)
            else:
                b = b.embed(a.registry)
        except FockStateError as e:
            raise TargetStateError(f"Cannot align registries: {e}") from e
    value = abs(a.inner_product(b)) ** 2
    return min(max(value, 0.0), 1.0)
