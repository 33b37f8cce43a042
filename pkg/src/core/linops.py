"""Linear-optics module.

Beam splitters and multiports as unitary transforms on creation operators,
and the expansion engine that applies them to sparse Fock states.

A transform with matrix U acting on modes (m_0, ..., m_{K-1}) maps
a^dagger(m_j) to sum_k U[k, j] a^dagger(m_k). Each basis ket is rewritten as a
monomial in creation operators, every acted operator is substituted by its
image, and the product is expanded multinomially.
"""

import logging
import math
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import unitary_group

from ..config import UNITARITY_TOLERANCE
from ..interfaces import AmplitudeEngineABC
from .fock import FockState, ModeRegistry, Occupation

logger = logging.getLogger(__name__)


class TransformError(Exception):
    """Base exception for linear-optical transform errors."""
    pass


@dataclass(frozen=True, eq=False)
class ModeTransform:
    """A K x K unitary acting on K distinct modes of a registry.

    Attributes:
        matrix: Complex unitary; column j is the image of input mode j.
        modes: Acted mode indices, in matrix order.
    """
    matrix: np.ndarray = field(compare=False)
    modes: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        matrix = np.asarray(self.matrix, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise TransformError(f"Transform matrix must be square, got shape {matrix.shape}")
        modes = tuple(int(m) for m in self.modes) or tuple(range(matrix.shape[0]))
        if len(modes) != matrix.shape[0]:
            raise TransformError(
                f"{matrix.shape[0]}x{matrix.shape[0]} matrix cannot act on {len(modes)} modes"
            )
        if len(set(modes)) != len(modes):
            raise TransformError(f"Acted modes must be distinct, got {modes}")
        if any(m < 0 for m in modes):
            raise TransformError(f"Negative mode index in {modes}")
        if not np.isfinite(matrix).all():
            raise TransformError("Transform matrix has non-finite entries")
        residual = unitarity_residual(matrix)
        if not residual < UNITARITY_TOLERANCE:
            raise TransformError(f"Matrix is not unitary (residual {residual:.3e})")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "modes", modes)

    @property
    def size(self) -> int:
        """Number of acted modes."""
        return len(self.modes)

    def on(self, modes: Sequence[int]) -> "ModeTransform":
        """Same matrix acting on a different list of modes."""
        return ModeTransform(self.matrix, tuple(modes))

    def validate_for(self, registry: ModeRegistry) -> None:
        """Check all acted modes exist in a registry.

        Raises:
            TransformError: If a mode index is out of range.
        """
        bad = [m for m in self.modes if m >= len(registry)]
        if bad:
            raise TransformError(
                f"Mode indices {bad} out of range for registry of {len(registry)} modes"
            )

    def full_matrix(self, mode_count: int) -> np.ndarray:
        """Embed into an identity over `mode_count` modes."""
        full = np.eye(mode_count, dtype=complex)
        index = np.array(self.modes)
        full[np.ix_(index, index)] = self.matrix
        return full


def unitarity_residual(matrix: np.ndarray) -> float:
    """Return max |U^dagger U - I|."""
    matrix = np.asarray(matrix, dtype=complex)
    return float(np.max(np.abs(matrix.conj().T @ matrix - np.eye(matrix.shape[0]))))


def beam_splitter(theta: float) -> ModeTransform:
    """Two-mode splitter with matrix [[cos, sin], [sin, -cos]].

    Input 0 goes to cos(theta) out-0 + sin(theta) out-1 and input 1 to
    sin(theta) out-0 - cos(theta) out-1.

    Args:
        theta: Splitting angle in radians; pi/4 is the symmetric splitter.

    Returns:
        2x2 ModeTransform acting on modes (0, 1) until rebound with `on`.
    """
    c, s = math.cos(theta), math.sin(theta)
    return ModeTransform(np.array([[c, s], [s, -c]], dtype=complex))


def symmetric_multiport(n: int) -> ModeTransform:
    """N-port symmetric splitter, U[j, k] = exp(2 pi i j k / N) / sqrt(N).

    Raises:
        TransformError: If n < 1.
    """
    if n < 1:
        raise TransformError(f"Multiport size must be positive, got {n}")
    j, k = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    matrix = np.exp(2j * np.pi * j * k / n) / math.sqrt(n)
    # Exact values where the phase is a multiple of pi/2.
    matrix = np.where(np.abs(matrix.real) < 1e-15, 1j * matrix.imag, matrix)
    matrix = np.where(np.abs(matrix.imag) < 1e-15, matrix.real + 0j, matrix)
    return ModeTransform(matrix)


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random dim x dim unitary; dim 1 is a random phase."""
    if dim < 1:
        raise TransformError(f"Dimension must be positive, got {dim}")
    if dim == 1:
        return np.array([[np.exp(2j * np.pi * rng.random())]])
    return np.asarray(unitary_group.rvs(dim, random_state=rng), dtype=complex)


def compose(first: ModeTransform, second: ModeTransform) -> ModeTransform:
    """Transform equal to applying `first` and then `second`.

    The result acts on the union of both mode lists (sorted).
    """
    modes = sorted(set(first.modes) | set(second.modes))
    position = {m: i for i, m in enumerate(modes)}

    def lift(t: ModeTransform) -> np.ndarray:
        lifted = np.eye(len(modes), dtype=complex)
        index = np.array([position[m] for m in t.modes])
        lifted[np.ix_(index, index)] = t.matrix
        return lifted

    return ModeTransform(lift(second) @ lift(first), tuple(modes))


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """All tuples of `parts` non-negative integers summing to `total`."""
    if parts == 1:
        yield (total,)
        return
    for head in range(total, -1, -1):
        for tail in _compositions(total - head, parts - 1):
            yield (head,) + tail


class ExpansionEngine(AmplitudeEngineABC):
    """Applies transforms by substituting and expanding creation operators.

    Expansions are cached per acted sub-occupation within one call, so terms
    that differ only outside the acted modes share the work.
    """

    name = "expansion"

    def apply(self, state: FockState, transform: ModeTransform) -> FockState:
        """Evolve a state through a transform.

        Args:
            state: Input state.
            transform: Unitary transform bound to modes of state.registry.

        Returns:
            Output state on the same registry.

        Raises:
            TransformError: If an acted mode is out of range.
        """
        transform.validate_for(state.registry)
        acted = transform.modes
        matrix = transform.matrix
        cache: dict[tuple[int, ...], list[tuple[tuple[int, ...], complex]]] = {}
        output: dict[tuple[int, ...], complex] = {}

        for occupation, amplitude in state:
            sub = tuple(occupation[m] for m in acted)
            expansion = cache.get(sub)
            if expansion is None:
                expansion = self._expand(matrix, sub)
                cache[sub] = expansion
            base = list(occupation)
            for image, coefficient in expansion:
                for position, mode in enumerate(acted):
                    base[mode] = image[position]
                key = tuple(base)
                output[key] = output.get(key, 0j) + amplitude * coefficient

        logger.debug(
            f"Applied {transform.size}x{transform.size} transform: "
            f"{len(state)} -> {len(output)} terms"
        )
        return FockState(
            state.registry,
            {Occupation.trusted(k): v for k, v in output.items()},
            state.tolerance,
        )

    @staticmethod
    def _expand(
        matrix: np.ndarray, sub: tuple[int, ...]
    ) -> list[tuple[tuple[int, ...], complex]]:
        """Expand prod_j (sum_k U[k,j] a_k^dagger)^{n_j} |0> / sqrt(prod n_j!).

        Returns:
            Output sub-occupations with their normalized amplitudes.
        """
        size = len(sub)
        monomials: dict[tuple[int, ...], complex] = {(0,) * size: 1.0 + 0j}
        for j, n_j in enumerate(sub):
            if n_j == 0:
                continue
            column = matrix[:, j]
            factors: list[tuple[tuple[int, ...], complex]] = []
            for split in _compositions(n_j, size):
                coefficient = complex(math.factorial(n_j))
                for k, c_k in enumerate(split):
                    if c_k:
                        coefficient *= column[k] ** c_k / math.factorial(c_k)
                if coefficient != 0:
                    factors.append((split, coefficient))
            grown: dict[tuple[int, ...], complex] = {}
            for exponents, value in monomials.items():
                for split, coefficient in factors:
                    key = tuple(e + c for e, c in zip(exponents, split))
                    grown[key] = grown.get(key, 0j) + value * coefficient
            monomials = grown

        norm_in = math.sqrt(math.prod(math.factorial(n) for n in sub))
        return [
            (
                exponents,
                value * math.sqrt(math.prod(math.factorial(e) for e in exponents)) / norm_in,
            )
            for exponents, value in monomials.items()
            if value != 0
        ]


_ENGINE = ExpansionEngine()


def apply(state: FockState, transform: ModeTransform) -> FockState:
    """Apply a transform with the expansion engine."""
    return _ENGINE.apply(state, transform)


def apply_parallel_polarization(
    state: FockState,
    transform: ModeTransform,
    beams: Sequence[str],
    engine: AmplitudeEngineABC | None = None,
) -> FockState:
    """Apply one physical element identically to the H and V modes of beams.

    Args:
        state: Input state.
        transform: K x K transform (its bound modes are ignored).
        beams: K beam labels, in matrix order.
        engine: Amplitude engine; the expansion engine when None.

    Returns:
        Output state.

    Raises:
        TransformError: If a beam lacks an H or V mode, or K != len(beams).
    """
    if len(beams) != transform.size:
        raise TransformError(
            f"{transform.size}-mode transform cannot act on {len(beams)} beams"
        )
    registry = state.registry
    missing = [(b, p) for p in ("H", "V") for b in beams if (str(b), p) not in registry]
    if missing:
        raise TransformError(f"Missing polarization sub-modes {missing}")
    for polarization in ("H", "V"):
        modes = [registry.index(b, polarization) for b in beams]
        state = (engine or _ENGINE).apply(state, transform.on(modes))
    return state
