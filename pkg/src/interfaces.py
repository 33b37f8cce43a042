"""Abstract interfaces for dependency injection.

Defines the ABC shared by the amplitude engines so that schemes and the
cross-check can run against either the expansion engine or the permanent
oracle.
"""

from abc import ABC, abstractmethod
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .core.fock import FockState
    from .core.linops import ModeTransform


class AmplitudeEngineABC(ABC):
    """Abstract interface for engines evolving Fock states through transforms."""

    name: str = "engine"

    @abstractmethod
    def apply(self, state: "FockState", transform: "ModeTransform") -> "FockState":
        """Evolve a state through a linear-optical transform.

        Args:
            state: Input Fock state.
            transform: Unitary transform bound to modes of the state's registry.

        Returns:
            Output Fock state on the same registry.
        """
        pass
