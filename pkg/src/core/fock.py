"""Fock state module.

Sparse representation of multi-mode bosonic Fock states over
polarization-labeled spatial beams, with the small algebra the schemes need:
superposition, inner products, normalization, tensor products and
single-mode creation/annihilation.
"""

import logging
import math
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType

from ..config import NORMALIZATION_TOLERANCE, POLARIZATIONS, PRUNE_TOLERANCE

logger = logging.getLogger(__name__)


class FockStateError(Exception):
    """Base exception for Fock state errors."""
    pass


class ZeroNormError(FockStateError):
    """Raised when normalizing a state with zero norm."""
    pass


ModeLabel = tuple[str, str]


@dataclass(frozen=True)
class ModeRegistry:
    """Ordered set of (beam, polarization) modes with dense indices.

    Attributes:
        entries: Mode labels in index order.
    """
    entries: tuple[ModeLabel, ...]
    _index: dict[ModeLabel, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        entries = tuple((str(beam), str(pol)) for beam, pol in self.entries)
        index: dict[ModeLabel, int] = {}
        for position, label in enumerate(entries):
            if label[1] not in POLARIZATIONS:
                raise FockStateError(f"Unknown polarization {label[1]!r} for beam {label[0]!r}")
            if label in index:
                raise FockStateError(f"Duplicate mode {label}")
            index[label] = position
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "_index", index)

    @classmethod
    def from_beams(cls, beams: Iterable[str]) -> "ModeRegistry":
        """Build a registry holding the H and V modes of every beam, in order.

        Args:
            beams: Beam labels.

        Returns:
            Registry with entries (b, H), (b, V) per beam.
        """
        return cls(tuple((str(beam), pol) for beam in beams for pol in POLARIZATIONS))

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, label: object) -> bool:
        return label in self._index

    @property
    def size(self) -> int:
        """Number of modes."""
        return len(self.entries)

    def index(self, beam: str, polarization: str) -> int:
        """Return the dense index of a mode.

        Raises:
            FockStateError: If the mode is not registered.
        """
        try:
            return self._index[(str(beam), polarization)]
        except KeyError as e:
            raise FockStateError(f"Mode ({beam}, {polarization}) not in registry") from e

    def label(self, mode: int) -> ModeLabel:
        """Return the (beam, polarization) label of a mode index."""
        return self.entries[mode]

    def beams(self) -> list[str]:
        """Beam labels in first-appearance order."""
        return list(dict.fromkeys(beam for beam, _ in self.entries))

    def beam_modes(self, beam: str) -> list[int]:
        """Indices of all registered polarization modes of a beam."""
        modes = [i for i, (b, _) in enumerate(self.entries) if b == str(beam)]
        if not modes:
            raise FockStateError(f"Beam {beam!r} not in registry")
        return modes

    def concat(self, other: "ModeRegistry") -> "ModeRegistry":
        """Concatenate two registries with disjoint labels.

        Raises:
            FockStateError: If any (beam, polarization) label appears in both.
        """
        overlap = set(self.entries) & set(other.entries)
        if overlap:
            raise FockStateError(f"Registries overlap on modes {sorted(overlap)}")
        return ModeRegistry(self.entries + other.entries)

    def relabel(self, mapping: Mapping[str, str]) -> "ModeRegistry":
        """Rename beams; beams absent from the mapping keep their label."""
        return ModeRegistry(tuple((mapping.get(b, b), p) for b, p in self.entries))


class Occupation(tuple[int, ...]):
    """Photon counts per mode, hashable and lexicographically ordered."""

    def __new__(cls, counts: Iterable[int]) -> "Occupation":
        values = tuple(int(c) for c in counts)
        if any(c < 0 for c in values):
            raise FockStateError(f"Negative photon count in {values}")
        return super().__new__(cls, values)

    @classmethod
    def trusted(cls, counts: Iterable[int]) -> "Occupation":
        """Wrap counts already known to be valid, skipping validation."""
        return tuple.__new__(cls, counts)

    @classmethod
    def empty(cls, size: int) -> "Occupation":
        """The all-zero occupation over `size` modes."""
        return tuple.__new__(cls, (0,) * size)

    @cached_property
    def total(self) -> int:
        """Total photon number."""
        return sum(self)

    def bosonic_weight(self) -> float:
        """Return sqrt(prod n_m!), the norm of prod (a_m^dagger)^n_m |0>."""
        return math.sqrt(math.prod(math.factorial(n) for n in self))

    def __repr__(self) -> str:
        return f"|{','.join(str(n) for n in self)}>"


class FockState:
    """Immutable sparse map from occupations to complex amplitudes.

    Terms are kept in lexicographic occupation order and amplitudes below the
    prune tolerance are dropped, so equal states iterate identically.

    Attributes:
        registry: Modes the occupations refer to.
        tolerance: Prune tolerance for amplitudes.
    """

    __slots__ = ("registry", "tolerance", "_terms")

    def __init__(
        self,
        registry: ModeRegistry,
        terms: Mapping[Occupation, complex] | None = None,
        tolerance: float = PRUNE_TOLERANCE,
    ) -> None:
        """Initialize a FockState.

        Args:
            registry: Mode registry.
            terms: Occupation to amplitude map; duplicates must already be merged.
            tolerance: Amplitudes with smaller magnitude are pruned.

        Raises:
            FockStateError: If an occupation length differs from the registry size.
        """
        size = len(registry)
        cleaned: dict[Occupation, complex] = {}
        for occupation in sorted(terms or {}):
            if len(occupation) != size:
                raise FockStateError(
                    f"Occupation {occupation!r} has {len(occupation)} modes, "
                    f"registry has {size}"
                )
            amplitude = complex(terms[occupation])  # type: ignore[index]
            if abs(amplitude) >= tolerance:
                key = occupation if isinstance(occupation, Occupation) else Occupation(occupation)
                cleaned[key] = amplitude
        self.registry = registry
        self.tolerance = tolerance
        self._terms = cleaned

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_terms(
        cls,
        registry: ModeRegistry,
        terms: Iterable[tuple[Sequence[int], complex]],
        tolerance: float = PRUNE_TOLERANCE,
    ) -> "FockState":
        """Build a state from (occupation, amplitude) pairs, summing duplicates.

        Args:
            registry: Mode registry.
            terms: Pairs of photon counts and amplitudes.
            tolerance: Prune tolerance.

        Returns:
            Unnormalized FockState.
        """
        merged: dict[Occupation, complex] = {}
        size = len(registry)
        for counts, amplitude in terms:
            occupation = counts if isinstance(counts, Occupation) else Occupation(counts)
            if len(occupation) != size:
                raise FockStateError(
                    f"Occupation {occupation!r} has {len(occupation)} modes, "
                    f"registry has {size}"
                )
            merged[occupation] = merged.get(occupation, 0j) + complex(amplitude)
        return cls(registry, merged, tolerance)

    @classmethod
    def vacuum(cls, registry: ModeRegistry) -> "FockState":
        """The normalized vacuum |0...0>."""
        return cls(registry, {Occupation.empty(len(registry)): 1.0})

    @classmethod
    def zero(cls, registry: ModeRegistry) -> "FockState":
        """The zero vector."""
        return cls(registry, {})

    @classmethod
    def basis(cls, registry: ModeRegistry, counts: Sequence[int]) -> "FockState":
        """A single normalized basis ket."""
        return cls.from_terms(registry, [(counts, 1.0)])

    @classmethod
    def from_labels(
        cls,
        registry: ModeRegistry,
        terms: Iterable[tuple[Mapping[ModeLabel, int], complex]],
    ) -> "FockState":
        """Build a state from label-keyed photon counts.

        Args:
            registry: Mode registry.
            terms: Pairs of {(beam, pol): count} and amplitude.

        Returns:
            Unnormalized FockState.
        """
        rows = []
        for counts, amplitude in terms:
            occupation = [0] * len(registry)
            for (beam, pol), n in counts.items():
                occupation[registry.index(beam, pol)] += n
            rows.append((occupation, amplitude))
        return cls.from_terms(registry, rows)

    # -- views --------------------------------------------------------------

    @property
    def terms(self) -> Mapping[Occupation, complex]:
        """Read-only occupation to amplitude map in lexicographic order."""
        return MappingProxyType(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[tuple[Occupation, complex]]:
        return iter(self._terms.items())

    def __repr__(self) -> str:
        shown = " + ".join(f"({a:.4g}){o!r}" for o, a in list(self._terms.items())[:6])
        more = "" if len(self._terms) <= 6 else f" + ... ({len(self._terms)} terms)"
        return f"FockState({shown or '0'}{more})"

    def amplitude(self, counts: Sequence[int]) -> complex:
        """Amplitude of one occupation (0 when absent)."""
        return self._terms.get(Occupation(counts), 0j)

    @property
    def is_zero(self) -> bool:
        """True for the zero vector."""
        return not self._terms

    def norm_squared(self) -> float:
        """Return <psi|psi>."""
        return math.fsum(abs(a) ** 2 for a in self._terms.values())

    def norm(self) -> float:
        """Return ||psi||."""
        return math.sqrt(self.norm_squared())

    def is_normalized(self, tolerance: float = NORMALIZATION_TOLERANCE) -> bool:
        """True when | <psi|psi> - 1 | < tolerance."""
        return abs(self.norm_squared() - 1.0) < tolerance

    def photon_numbers(self) -> set[int]:
        """Distinct total photon numbers present."""
        return {occupation.total for occupation in self._terms}

    # -- algebra ------------------------------------------------------------

    def _require_same_registry(self, other: "FockState") -> None:
        if self.registry != other.registry:
            raise FockStateError("States live on different mode registries")

    def inner_product(self, other: "FockState") -> complex:
        """Return <self|other>, conjugating self.

        Raises:
            FockStateError: If the registries differ.
        """
        self._require_same_registry(other)
        small, large = (self, other) if len(self) <= len(other) else (other, self)
        total = 0j
        for occupation, amplitude in small._terms.items():
            partner = large._terms.get(occupation)
            if partner is not None:
                if small is self:
                    total += amplitude.conjugate() * partner
                else:
                    total += partner.conjugate() * amplitude
        return total

    def scale(self, factor: complex) -> "FockState":
        """Return factor * self."""
        return FockState(
            self.registry,
            {o: a * factor for o, a in self._terms.items()},
            self.tolerance,
        )

    def __add__(self, other: "FockState") -> "FockState":
        self._require_same_registry(other)
        merged = dict(self._terms)
        for occupation, amplitude in other._terms.items():
            merged[occupation] = merged.get(occupation, 0j) + amplitude
        return FockState(self.registry, merged, self.tolerance)

    def __sub__(self, other: "FockState") -> "FockState":
        return self + other.scale(-1.0)

    def normalize(self) -> tuple["FockState", float]:
        """Return (self / ||self||, ||self||^2).

        Raises:
            ZeroNormError: If the state is the zero vector.
        """
        weight = self.norm_squared()
        if weight == 0.0:
            raise ZeroNormError("Cannot normalize the zero state")
        return self.scale(1.0 / math.sqrt(weight)), weight

    def tensor(self, other: "FockState") -> "FockState":
        """Tensor product over the concatenated registry.

        Raises:
            FockStateError: If the registries share a (beam, polarization) label.
        """
        registry = self.registry.concat(other.registry)
        terms = {
            Occupation.trusted(left + right): a * b
            for left, a in self._terms.items()
            for right, b in other._terms.items()
        }
        return FockState(registry, terms, min(self.tolerance, other.tolerance))

    def create(self, mode: int) -> "FockState":
        """Apply the creation operator a_mode^dagger."""
        self._check_mode(mode)
        terms: dict[Occupation, complex] = {}
        for occupation, amplitude in self._terms.items():
            counts = list(occupation)
            counts[mode] += 1
            terms[Occupation.trusted(counts)] = amplitude * math.sqrt(counts[mode])
        return FockState(self.registry, terms, self.tolerance)

    def annihilate(self, mode: int) -> "FockState":
        """Apply the annihilation operator a_mode."""
        self._check_mode(mode)
        terms: dict[Occupation, complex] = {}
        for occupation, amplitude in self._terms.items():
            if occupation[mode] == 0:
                continue
            counts = list(occupation)
            terms[Occupation.trusted(counts[:mode] + [counts[mode] - 1] + counts[mode + 1:])] = (
                amplitude * math.sqrt(occupation[mode])
            )
        return FockState(self.registry, terms, self.tolerance)

    def _check_mode(self, mode: int) -> None:
        if not 0 <= mode < len(self.registry):
            raise FockStateError(f"Mode index {mode} out of range for {len(self.registry)} modes")

    # -- registry alignment ---------------------------------------------------

    def embed(self, registry: ModeRegistry) -> "FockState":
        """Place this state on a larger registry by label; extra modes are vacuum.

        Raises:
            FockStateError: If one of this state's modes is missing from `registry`.
        """
        positions = [registry.index(beam, pol) for beam, pol in self.registry.entries]
        size = len(registry)
        terms: dict[Occupation, complex] = {}
        for occupation, amplitude in self._terms.items():
            counts = [0] * size
            for source, target in enumerate(positions):
                counts[target] = occupation[source]
            terms[Occupation.trusted(counts)] = amplitude
        return FockState(registry, terms, self.tolerance)

    def relabel(self, mapping: Mapping[str, str]) -> "FockState":
        """Rename beams without touching amplitudes."""
        return FockState(self.registry.relabel(mapping), self._terms, self.tolerance)

    def allclose(self, other: "FockState", atol: float = NORMALIZATION_TOLERANCE) -> bool:
        """Amplitude-wise comparison on a common registry."""
        self._require_same_registry(other)
        keys = set(self._terms) | set(other._terms)
        return all(
            abs(self._terms.get(k, 0j) - other._terms.get(k, 0j)) <= atol for k in keys
        )


def from_terms(
    registry: ModeRegistry,
    terms: Iterable[tuple[Sequence[int], complex]],
    tolerance: float = PRUNE_TOLERANCE,
) -> FockState:
    """Build a state from (occupation, amplitude) pairs. See FockState.from_terms."""
    return FockState.from_terms(registry, terms, tolerance)


def inner_product(a: FockState, b: FockState) -> complex:
    """Return <a|b>."""
    return a.inner_product(b)


def normalize(a: FockState) -> tuple[FockState, float]:
    """Return (a / ||a||, ||a||^2)."""
    return a.normalize()


def tensor(a: FockState, b: FockState) -> FockState:
    """Tensor product of states on disjoint registries."""
    return a.tensor(b)
