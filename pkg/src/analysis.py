"""Analysis module.

Qubit-level reading of one-photon-per-beam states (H -> 0, V -> 1), reduced
density matrices, and the 1 -> 2 telecloning protocol run on the telecloning
state: Bell measurement of input and port, Pauli corrections on the two
clones, and the resulting clone fidelities.
"""

import itertools
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .config import (
    CLONE_FIDELITY_TOLERANCE,
    NORMALIZATION_TOLERANCE,
    PROJECTION_INPUT_TOLERANCE,
    TELECLONING_OUTPUT_BEAMS,
)
from .core.fock import FockState, FockStateError
from .targets import telecloning_state

logger = logging.getLogger(__name__)


class AnalysisError(Exception):
    """Base exception for qubit analysis errors."""
    pass


OPTIMAL_CLONE_FIDELITY = 5 / 6

PAULIS: dict[str, np.ndarray] = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

_SQRT_HALF = 1 / math.sqrt(2)

# Two-qubit Bell basis on (input, port), in outcome order.
BELL_STATES: dict[str, np.ndarray] = {
    "phi+": np.array([1, 0, 0, 1], dtype=complex) * _SQRT_HALF,
    "phi-": np.array([1, 0, 0, -1], dtype=complex) * _SQRT_HALF,
    "psi+": np.array([0, 1, 1, 0], dtype=complex) * _SQRT_HALF,
    "psi-": np.array([0, 1, -1, 0], dtype=complex) * _SQRT_HALF,
}

# Pauli pair applied to (clone 1, clone 2) after each Bell outcome.
# Reproduced by derive_correction_table().
CORRECTION_TABLE: dict[str, tuple[str, str]] = {
    "phi+": ("X", "X"),
    "phi-": ("Y", "Y"),
    "psi+": ("I", "I"),
    "psi-": ("Z", "Z"),
}


@dataclass(frozen=True)
class QubitRegister:
    """Dual-rail reading of beams as qubits, first beam most significant.

    Attributes:
        beams: Beams carrying one photon each, in qubit order.
    """
    beams: tuple[str, ...]

    def __post_init__(self) -> None:
        beams = tuple(str(b) for b in self.beams)
        if not beams or len(set(beams)) != len(beams):
            raise AnalysisError(f"Qubit register needs distinct beams, got {beams}")
        object.__setattr__(self, "beams", beams)

    def __len__(self) -> int:
        return len(self.beams)


@dataclass(frozen=True)
class DensityMatrix:
    """A k-qubit density matrix.

    Attributes:
        matrix: 2^k x 2^k complex matrix, Hermitian with unit trace and no
            eigenvalue below -tolerance.
    """
    matrix: np.ndarray

    def __post_init__(self) -> None:
        rho = np.asarray(self.matrix, dtype=complex)
        dim = rho.shape[0] if rho.ndim == 2 else 0
        if rho.ndim != 2 or rho.shape != (dim, dim) or dim < 2 or dim & (dim - 1):
            raise AnalysisError(f"Density matrix must be 2^k square, got shape {rho.shape}")
        if np.max(np.abs(rho - rho.conj().T)) > NORMALIZATION_TOLERANCE:
            raise AnalysisError("Density matrix is not Hermitian")
        if abs(np.trace(rho) - 1.0) > NORMALIZATION_TOLERANCE:
            raise AnalysisError(f"Density matrix trace is {np.trace(rho).real:.12g}, not 1")
        if np.min(np.linalg.eigvalsh(rho)) < -NORMALIZATION_TOLERANCE:
            raise AnalysisError("Density matrix has a negative eigenvalue")
        rho.setflags(write=False)
        object.__setattr__(self, "matrix", rho)

    @classmethod
    def from_pure(cls, vector: np.ndarray) -> "DensityMatrix":
        """Projector onto a normalized state vector."""
        psi = np.asarray(vector, dtype=complex)
        return cls(np.outer(psi, psi.conj()))

    @property
    def qubits(self) -> int:
        """Number of qubits k."""
        return self.matrix.shape[0].bit_length() - 1

    def expectation(self, vector: np.ndarray) -> float:
        """Return <v|rho|v>."""
        v = np.asarray(vector, dtype=complex)
        return float(np.real(v.conj() @ self.matrix @ v))

    def bloch_vector(self) -> np.ndarray:
        """(<X>, <Y>, <Z>) of a single-qubit state."""
        if self.qubits != 1:
            raise AnalysisError(f"Bloch vector needs one qubit, got {self.qubits}")
        return np.array([np.real(np.trace(self.matrix @ PAULIS[p])) for p in "XYZ"])


def to_qubits(state: FockState, register: QubitRegister) -> np.ndarray:
    """Relabel a one-photon-per-beam state into 2^k qubit amplitudes.

    Args:
        state: Fock state whose every term puts exactly one photon on each
            register beam and none elsewhere.
        register: Beams read as qubits.

    Returns:
        Complex vector of length 2^k.

    Raises:
        AnalysisError: If a term breaks the one-photon-per-beam encoding.
    """
    registry = state.registry
    try:
        rails = [(registry.index(b, "H"), registry.index(b, "V")) for b in register.beams]
    except FockStateError as e:
        raise AnalysisError(f"Register beam missing from state: {e}") from e
    on_register = {m for pair in rails for m in pair}

    vector = np.zeros(2 ** len(register), dtype=complex)
    for occupation, amplitude in state:
        stray = [m for m, n in enumerate(occupation) if n and m not in on_register]
        if stray:
            raise AnalysisError(f"Term {occupation!r} has photons outside the register")
        index = 0
        for h, v in rails:
            if (occupation[h], occupation[v]) == (1, 0):
                bit = 0
            elif (occupation[h], occupation[v]) == (0, 1):
                bit = 1
            else:
                raise AnalysisError(
                    f"Term {occupation!r} does not carry one photon per register beam"
                )
            index = (index << 1) | bit
        vector[index] += amplitude
    return vector


def partial_trace(
    state: np.ndarray | DensityMatrix,
    keep: Sequence[int],
) -> DensityMatrix:
    """Reduce to the listed qubit positions, kept in ascending order.

    Args:
        state: Pure state vector or DensityMatrix over k qubits.
        keep: Qubit positions to keep (0 = most significant).

    Returns:
        Reduced DensityMatrix.

    Raises:
        AnalysisError: If keep is empty or a position is out of range.
    """
    if isinstance(state, DensityMatrix):
        rho = state.matrix
    else:
        psi = np.asarray(state, dtype=complex)
        rho = np.outer(psi, psi.conj())
    qubits = rho.shape[0].bit_length() - 1
    kept = sorted(set(int(q) for q in keep))
    if not kept:
        raise AnalysisError("Partial trace needs at least one kept qubit")
    if kept[0] < 0 or kept[-1] >= qubits:
        raise AnalysisError(f"Qubit positions {kept} out of range for {qubits} qubits")

    tensor = rho.reshape([2] * (2 * qubits))
    remaining = qubits
    for position in sorted(set(range(qubits)) - set(kept), reverse=True):
        tensor = np.trace(tensor, axis1=position, axis2=position + remaining)
        remaining -= 1
    dim = 2 ** len(kept)
    return DensityMatrix(tensor.reshape(dim, dim))


@dataclass(frozen=True)
class CloneOutcome:
    """Result of one Bell outcome of the telecloning protocol.

    Attributes:
        outcome: Bell state name.
        probability: Probability of the outcome.
        correction: Pauli pair applied to the clones.
        fidelities: <input|rho|input> for clone 1 and clone 2.
        clones: Reduced states of clone 1 and clone 2.
        shrinking_factor: Bloch-vector length of clone 1 for a pure input.
    """
    outcome: str
    probability: float
    correction: tuple[str, str]
    fidelities: tuple[float, float]
    clones: tuple[DensityMatrix, DensityMatrix]
    shrinking_factor: float


def _input_vector(alpha: complex, beta: complex) -> np.ndarray:
    psi = np.array([alpha, beta], dtype=complex)
    weight = float(np.real(psi.conj() @ psi))
    if abs(weight - 1.0) > PROJECTION_INPUT_TOLERANCE:
        raise AnalysisError(f"Input qubit is not normalized: |a|^2 + |b|^2 = {weight:.12g}")
    return psi


def _telecloning_qubits() -> np.ndarray:
    # Qubit order: port, ancilla, clone 1, clone 2.
    named = telecloning_state(TELECLONING_OUTPUT_BEAMS)
    return to_qubits(named.state, QubitRegister(TELECLONING_OUTPUT_BEAMS))


def _bell_branches(psi: np.ndarray) -> dict[str, tuple[float, np.ndarray]]:
    """Outcome probability and normalized (ancilla, clone 1, clone 2) state per Bell outcome."""
    joint = np.kron(psi, _telecloning_qubits()).reshape(4, 8)
    branches = {}
    for name, bell in BELL_STATES.items():
        branch = bell.conj() @ joint
        probability = float(np.real(branch.conj() @ branch))
        if probability > 0.0:
            branch = branch / math.sqrt(probability)
        branches[name] = (probability, branch)
    return branches


def _corrected_clones(
    branch: np.ndarray, correction: tuple[str, str]
) -> tuple[DensityMatrix, DensityMatrix]:
    first, second = correction
    operator = np.kron(PAULIS["I"], np.kron(PAULIS[first], PAULIS[second]))
    corrected = operator @ branch
    return partial_trace(corrected, [1]), partial_trace(corrected, [2])


def telecloning_protocol(
    alpha: complex,
    beta: complex,
    correction_table: dict[str, tuple[str, str]] = CORRECTION_TABLE,
) -> list[CloneOutcome]:
    """Teleclone alpha|0> + beta|1> to two clones through the telecloning state.

    The telecloning state provides the port (1'), ancilla (2') and the two
    clones (3', 4'). Input and port are projected onto each Bell state and
    the outcome's Pauli correction is applied to both clones.

    Args:
        alpha: Amplitude of |0> (H).
        beta: Amplitude of |1> (V).
        correction_table: Pauli pair per Bell outcome.

    Returns:
        One CloneOutcome per Bell outcome, in BELL_STATES order.

    Raises:
        AnalysisError: If the input is not normalized.
    """
    psi = _input_vector(alpha, beta)
    outcomes = []
    for name, (probability, branch) in _bell_branches(psi).items():
        correction = correction_table[name]
        clones = _corrected_clones(branch, correction)
        fidelities = (clones[0].expectation(psi), clones[1].expectation(psi))
        outcomes.append(
            CloneOutcome(
                outcome=name,
                probability=probability,
                correction=correction,
                fidelities=fidelities,
                clones=clones,
                shrinking_factor=float(np.linalg.norm(clones[0].bloch_vector())),
            )
        )
        logger.debug(f"{name}: p={probability:.6f} fidelities={fidelities}")
    return outcomes


def axis_eigenstates() -> list[np.ndarray]:
    """The six eigenstates of X, Y and Z."""
    s = _SQRT_HALF
    return [
        np.array([1, 0], dtype=complex),
        np.array([0, 1], dtype=complex),
        np.array([s, s], dtype=complex),
        np.array([s, -s], dtype=complex),
        np.array([s, 1j * s], dtype=complex),
        np.array([s, -1j * s], dtype=complex),
    ]


def derive_correction_table() -> dict[str, tuple[str, str]]:
    """Find, per Bell outcome, the Pauli pair giving optimal fidelity on every axis eigenstate.

    All 16 pairs are tried; a pair qualifies when both clones reach 5/6 for
    all six axis eigenstates.

    Returns:
        Map from Bell outcome to its unique qualifying Pauli pair.

    Raises:
        AnalysisError: If some outcome has no qualifying pair or several.
    """
    samples = [(psi, _bell_branches(psi)) for psi in axis_eigenstates()]
    table = {}
    for name in BELL_STATES:
        qualifying = []
        for pair in itertools.product(PAULIS, repeat=2):
            worst = 0.0
            for psi, branches in samples:
                clones = _corrected_clones(branches[name][1], pair)
                for clone in clones:
                    worst = max(worst, abs(clone.expectation(psi) - OPTIMAL_CLONE_FIDELITY))
            if worst < CLONE_FIDELITY_TOLERANCE:
                qualifying.append(pair)
        if len(qualifying) != 1:
            raise AnalysisError(f"Outcome {name}: expected one correction, found {qualifying}")
        table[name] = qualifying[0]
        logger.debug(f"Correction for {name}: {qualifying[0]}")
    return table
