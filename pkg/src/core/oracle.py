"""Permanent oracle module.

Independent dense path from a single-photon unitary to Fock-space amplitudes
via matrix permanents. It shares no expansion code with the linops engine,
so agreement between the two is evidence rather than tautology.
"""

import itertools
import logging
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np
from scipy.special import comb
from tqdm import tqdm

from ..config import (
    DENSE_MAX_ENTRIES,
    DENSE_WARN_FRACTION,
    PERMANENT_MAX_SIZE,
)
from ..interfaces import AmplitudeEngineABC
from .fock import FockState, Occupation

if TYPE_CHECKING:
    from .linops import ModeTransform

logger = logging.getLogger(__name__)


class OracleError(Exception):
    """Base exception for oracle errors."""
    pass


class DenseBasisLimitError(OracleError):
    """Raised when a dense basis exceeds the configured ceiling."""
    pass


def permanent(matrix: np.ndarray) -> complex:
    """Permanent by Ryser's formula with Gray-code subset updates.

    Cost is O(2^K K): consecutive Gray codes differ in one column, so the
    row sums are updated by a single column add or subtract.

    Args:
        matrix: Square complex matrix with K <= PERMANENT_MAX_SIZE.

    Returns:
        The permanent; 1 for the 0 x 0 matrix.

    Raises:
        OracleError: If the matrix is not square or too large.
    """
    a = np.asarray(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise OracleError(f"Permanent needs a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if n > PERMANENT_MAX_SIZE:
        raise OracleError(f"Permanent size {n} exceeds limit {PERMANENT_MAX_SIZE}")
    if n == 0:
        return 1.0 + 0j

    row_sums = np.zeros(n, dtype=complex)
    total = 0j
    previous = 0
    for k in range(1, 2 ** n):
        gray = k ^ (k >> 1)
        changed = gray ^ previous
        column = changed.bit_length() - 1
        if gray & changed:
            row_sums += a[:, column]
        else:
            row_sums -= a[:, column]
        previous = gray
        term = complex(np.prod(row_sums))
        # Subset size parity of the Gray code fixes the sign.
        total += -term if bin(gray).count("1") % 2 else term
    return total if n % 2 == 0 else -total


@dataclass(frozen=True)
class DenseBasis:
    """Lexicographic enumeration of all n-photon occupations of M modes.

    Attributes:
        mode_count: Number of modes M.
        photons: Total photon number n.
        states: Occupations in lexicographic order.
    """
    mode_count: int
    photons: int
    states: tuple[Occupation, ...] = field(init=False, repr=False)
    _index: dict[Occupation, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.mode_count < 1 or self.photons < 0:
            raise OracleError(
                f"Invalid dense basis: {self.mode_count} modes, {self.photons} photons"
            )
        states = tuple(
            sorted(
                Occupation.trusted(counts)
                for counts in _occupations(self.photons, self.mode_count)
            )
        )
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(states)})

    @staticmethod
    def dimension(mode_count: int, photons: int) -> int:
        """C(n + M - 1, M - 1) without building the basis."""
        return int(comb(photons + mode_count - 1, mode_count - 1, exact=True))

    def __len__(self) -> int:
        return len(self.states)

    def index(self, occupation: Sequence[int]) -> int:
        """Position of an occupation in the enumeration."""
        return self._index[Occupation.trusted(occupation)]


def _occupations(photons: int, modes: int) -> Iterable[tuple[int, ...]]:
    """Occupations via stars and bars over bar positions."""
    for bars in itertools.combinations(range(photons + modes - 1), modes - 1):
        edges = (-1,) + bars + (photons + modes - 1,)
        yield tuple(edges[i + 1] - edges[i] - 1 for i in range(modes))


def transition_amplitude(
    unitary: np.ndarray,
    inputs: Sequence[int],
    outputs: Sequence[int],
) -> complex:
    """<out| U_Fock |in> = per(U_sub) / sqrt(prod in_i! prod out_j!).

    U_sub repeats column j of U in_j times and row k out_k times.

    Raises:
        OracleError: If the photon numbers differ or the shapes mismatch.
    """
    u = np.asarray(unitary, dtype=complex)
    if len(inputs) != u.shape[1] or len(outputs) != u.shape[0]:
        raise OracleError(
            f"Occupations of length {len(inputs)}/{len(outputs)} do not fit "
            f"a {u.shape[0]}x{u.shape[1]} unitary"
        )
    if sum(inputs) != sum(outputs):
        raise OracleError(
            f"Photon number mismatch: {sum(inputs)} in, {sum(outputs)} out"
        )
    columns = np.repeat(np.arange(len(inputs)), inputs)
    rows = np.repeat(np.arange(len(outputs)), outputs)
    sub = u[np.ix_(rows, columns)]
    weight = (
        Occupation.trusted(inputs).bosonic_weight()
        * Occupation.trusted(outputs).bosonic_weight()
    )
    return permanent(sub) / weight


def _amplitude_row(
    args: tuple[np.ndarray, tuple[int, ...], list[tuple[tuple[int, ...], complex]]],
) -> complex:
    unitary, output, sources = args
    return sum(
        (amplitude * transition_amplitude(unitary, source, output) for source, amplitude in sources),
        0j,
    )


def dense_apply(
    state: FockState,
    unitary: np.ndarray,
    *,
    support: Callable[[Occupation], bool] | None = None,
    max_entries: int = DENSE_MAX_ENTRIES,
    workers: int = 1,
    progress: bool = False,
) -> FockState:
    """Evolve a state through a full-registry unitary, basis pair by basis pair.

    Args:
        state: Input state on M modes.
        unitary: M x M single-photon unitary over the whole registry.
        support: Optional predicate restricting which output occupations are
            evaluated; amplitudes outside it are left out.
        max_entries: Ceiling on the dense basis size per photon sector.
        workers: Process count for the output loop; results keep basis order.
        progress: Show a tqdm bar over output occupations.

    Returns:
        Output state (restricted to `support` when given).

    Raises:
        DenseBasisLimitError: If a photon sector's basis exceeds `max_entries`.
    """
    m = len(state.registry)
    u = np.asarray(unitary, dtype=complex)
    if u.shape != (m, m):
        raise OracleError(f"Unitary shape {u.shape} does not match {m} modes")

    sectors: dict[int, list[tuple[tuple[int, ...], complex]]] = {}
    for occupation, amplitude in state:
        sectors.setdefault(occupation.total, []).append((tuple(occupation), amplitude))

    output: dict[Occupation, complex] = {}
    for photons, sources in sorted(sectors.items()):
        size = DenseBasis.dimension(m, photons)
        if size > max_entries:
            raise DenseBasisLimitError(
                f"Dense basis for {photons} photons in {m} modes has {size} entries "
                f"(ceiling {max_entries})"
            )
        if size > DENSE_WARN_FRACTION * max_entries:
            logger.warning(f"Dense basis size {size} is close to the ceiling {max_entries}")
        basis = DenseBasis(m, photons)
        targets = [o for o in basis.states if support is None or support(o)]
        logger.debug(
            f"Dense sector n={photons}: basis {size}, "
            f"evaluating {len(targets)} outputs from {len(sources)} inputs"
        )
        jobs = [(u, tuple(o), sources) for o in targets]
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                amplitudes = list(pool.map(_amplitude_row, jobs, chunksize=64))
        else:
            amplitudes = [
                _amplitude_row(job)
                for job in tqdm(jobs, desc=f"Dense n={photons}", unit="out", disable=not progress)
            ]
        for occupation, amplitude in zip(targets, amplitudes):
            output[occupation] = output.get(occupation, 0j) + amplitude

    return FockState(state.registry, output, state.tolerance)


class PermanentEngine(AmplitudeEngineABC):
    """Amplitude engine backed by the dense permanent path."""

    name = "permanent"

    def __init__(self, max_entries: int = DENSE_MAX_ENTRIES, workers: int = 1) -> None:
        """Initialize the PermanentEngine.

        Args:
            max_entries: Dense basis ceiling.
            workers: Process count for the output loop.
        """
        self.max_entries = max_entries
        self.workers = workers

    def apply(self, state: FockState, transform: "ModeTransform") -> FockState:
        """Evolve a state through the transform embedded in the full registry."""
        transform.validate_for(state.registry)
        return dense_apply(
            state,
            transform.full_matrix(len(state.registry)),
            max_entries=self.max_entries,
            workers=self.workers,
        )
