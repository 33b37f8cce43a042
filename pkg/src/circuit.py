"""Circuit description module.

Strictly validated JSON description of a linear-optical scheme (beams,
initial entangled pairs, ordered elements, post-selection blocks) and the
evaluator that runs it. The named schemes compile to the same description,
so circuit files and built-in schemes share one code path.
"""

import json
import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field
from pathlib import Path
from typing import Annotated, Any, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .core.fock import FockState, ModeRegistry, Occupation
from .core.linops import (
    ExpansionEngine,
    ModeTransform,
    apply_parallel_polarization,
    beam_splitter,
    symmetric_multiport,
)
from .core.measure import ProjectionResult, project_beam_counts, project_vacuum
from .interfaces import AmplitudeEngineABC
from .targets import NamedState, epr_pair, spin_j_state, telecloning_state

logger = logging.getLogger(__name__)


class CircuitError(Exception):
    """Raised for malformed or inconsistent circuit descriptions."""
    pass


Polarization = Literal["H", "V"]
ModeRef = tuple[str, Polarization]


class _StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class SplitterElement(_StrictModel):
    """Two-mode splitter between two (beam, polarization) modes."""
    kind: Literal["splitter"]
    theta: Annotated[float, Field(allow_inf_nan=False)]
    modes: tuple[ModeRef, ModeRef]


class ParallelSplitterElement(_StrictModel):
    """Splitter acting identically on the H and V modes of two beams."""
    kind: Literal["parallel_splitter"]
    theta: Annotated[float, Field(allow_inf_nan=False)]
    beams: tuple[str, str]


class MultiportElement(_StrictModel):
    """Symmetric N-port on one polarization of N beams."""
    kind: Literal["multiport"]
    size: int = Field(ge=1)
    beams: list[str]
    polarization: Polarization

    @model_validator(mode="after")
    def _beams_match_size(self) -> "MultiportElement":
        if len(self.beams) != self.size:
            raise ValueError(f"multiport of size {self.size} lists {len(self.beams)} beams")
        return self


Element = Annotated[
    SplitterElement | ParallelSplitterElement | MultiportElement,
    Field(discriminator="kind"),
]


class VacuumBlock(_StrictModel):
    """Herald on zero photons in every listed mode."""
    vacuum: list[ModeRef]


class CoincidenceBlock(_StrictModel):
    """Keep terms with an exact photon count on each listed beam."""
    coincidence: list[tuple[str, Annotated[int, Field(ge=0)]]]


class NamedStateRef(_StrictModel):
    """Reference to a constructor in the targets module."""
    name: Literal["epr", "spin-j", "telecloning"]
    beams: list[str]
    pairs: int | None = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _beam_count(self) -> "NamedStateRef":
        expected = 4 if self.name == "telecloning" else 2
        if len(self.beams) != expected or len(set(self.beams)) != expected:
            raise ValueError(f"{self.name} state needs {expected} distinct beams")
        if self.name == "spin-j" and self.pairs is None:
            raise ValueError("spin-j state needs 'pairs'")
        return self

    def build(self) -> NamedState:
        """Construct the referenced state."""
        if self.name == "epr":
            return epr_pair(*self.beams)
        if self.name == "spin-j":
            return spin_j_state(self.pairs or 1, *self.beams)
        return telecloning_state(self.beams)


class CircuitSpec(_StrictModel):
    """A complete scheme description.

    Attributes:
        beams: Declared beam labels; every beam gets an H and a V mode.
        pairs: Beam pairs each holding one EPR pair initially.
        initial_state: Named initial state, instead of pairs.
        elements: Optical elements in application order.
        postselect: Post-selection blocks, applied in order after all elements.
        target: Optional state the output is compared against.
    """
    beams: list[str] = Field(min_length=1)
    pairs: list[tuple[str, str]] = Field(default_factory=list)
    initial_state: NamedStateRef | None = None
    elements: list[Element] = Field(default_factory=list)
    postselect: list[VacuumBlock | CoincidenceBlock] = Field(default_factory=list)
    target: NamedStateRef | None = None

    @model_validator(mode="after")
    def _references_resolve(self) -> "CircuitSpec":
        declared = set(self.beams)
        if len(declared) != len(self.beams):
            raise ValueError("beams must be distinct")
        if bool(self.pairs) == (self.initial_state is not None):
            raise ValueError("give exactly one of 'pairs' or 'initial_state'")

        used: list[str] = []
        for a, b in self.pairs:
            used += [a, b]
        if len(set(used)) != len(used):
            raise ValueError("a beam may hold at most one EPR photon")

        referenced = list(used)
        if self.initial_state is not None:
            referenced += self.initial_state.beams
        for element in self.elements:
            if isinstance(element, SplitterElement):
                referenced += [beam for beam, _ in element.modes]
                if element.modes[0] == element.modes[1]:
                    raise ValueError("splitter modes must differ")
            else:
                referenced += list(element.beams)
                if len(set(element.beams)) != len(element.beams):
                    raise ValueError(f"{element.kind} beams must differ")
        for block in self.postselect:
            if isinstance(block, VacuumBlock):
                referenced += [beam for beam, _ in block.vacuum]
            else:
                referenced += [beam for beam, _ in block.coincidence]
        if self.target is not None:
            referenced += self.target.beams

        unknown = sorted(set(referenced) - declared)
        if unknown:
            raise ValueError(f"undeclared beams referenced: {unknown}")
        return self

    @property
    def registry(self) -> ModeRegistry:
        """Registry with H and V modes for every declared beam."""
        return ModeRegistry.from_beams(self.beams)


def _format_validation_error(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        location = ".".join(str(p) for p in item["loc"]) or "<root>"
        parts.append(f"{location}: {item['msg']}")
    return "; ".join(parts)


def parse_circuit(data: str | dict[str, Any]) -> CircuitSpec:
    """Parse and validate a circuit description.

    Args:
        data: JSON text or an already-decoded mapping.

    Returns:
        Validated CircuitSpec.

    Raises:
        CircuitError: With line/column for JSON syntax errors, or the field
            path for validation errors.
    """
    if isinstance(data, str):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as e:
            raise CircuitError(f"line {e.lineno}, column {e.colno}: {e.msg}") from e
    try:
        return CircuitSpec.model_validate(data)
    except ValidationError as e:
        raise CircuitError(_format_validation_error(e)) from e


def load_circuit(path: Path) -> CircuitSpec:
    """Read and validate a circuit file.

    Raises:
        CircuitError: If the file is unreadable or invalid.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise CircuitError(f"Cannot read circuit file {path}: {e}") from e
    try:
        return parse_circuit(text)
    except CircuitError as e:
        raise CircuitError(f"{path}: {e}") from e


@dataclass
class CircuitResult:
    """Result of evaluating a circuit.

    Attributes:
        state: Final normalized state, or the zero state if a block failed.
        stage_probabilities: Conditional probability of each post-selection block.
    """
    state: FockState
    stage_probabilities: list[float] = field(default_factory=list)

    @property
    def success_probability(self) -> float:
        """Product of stage probabilities."""
        return math.prod(self.stage_probabilities)

    @property
    def succeeded(self) -> bool:
        """True unless some block had zero probability."""
        return self.success_probability > 0.0


def initial_state(spec: CircuitSpec) -> FockState:
    """Build the input state on the circuit's registry."""
    registry = spec.registry
    if spec.initial_state is not None:
        return spec.initial_state.build().state.embed(registry)
    states = [epr_pair(a, b).state for a, b in spec.pairs]
    product = states[0]
    for other in states[1:]:
        product = product.tensor(other)
    return product.embed(registry)


def evaluate_circuit(
    spec: CircuitSpec,
    engine: AmplitudeEngineABC | None = None,
) -> CircuitResult:
    """Run a circuit: build the input, apply elements, post-select in order.

    Args:
        spec: Validated circuit.
        engine: Amplitude engine for the elements; expansion engine when None.

    Returns:
        CircuitResult; evaluation stops at the first zero-probability block.
    """
    engine = engine or ExpansionEngine()
    registry = spec.registry
    state = initial_state(spec)
    logger.debug(f"Circuit input: {len(state)} terms on {len(registry)} modes")

    for element in spec.elements:
        if isinstance(element, ParallelSplitterElement):
            state = apply_parallel_polarization(
                state, beam_splitter(element.theta), element.beams, engine=engine
            )
        else:
            for transform in element_transforms(element, registry):
                state = engine.apply(state, transform)
        logger.debug(f"After {element.kind}: {len(state)} terms")

    probabilities: list[float] = []
    for block in spec.postselect:
        result: ProjectionResult
        if isinstance(block, VacuumBlock):
            result = project_vacuum(state, [registry.index(b, p) for b, p in block.vacuum])
        else:
            result = project_beam_counts(state, block.coincidence)
        probabilities.append(result.probability)
        state = result.state
        if not result.succeeded:
            logger.warning(f"Post-selection block {len(probabilities)} has zero probability")
            break

    return CircuitResult(state=state, stage_probabilities=probabilities)


def element_transforms(
    element: SplitterElement | ParallelSplitterElement | MultiportElement,
    registry: ModeRegistry,
) -> list[ModeTransform]:
    """Mode-bound transforms realizing one element, in application order."""
    if isinstance(element, SplitterElement):
        modes = [registry.index(beam, pol) for beam, pol in element.modes]
        return [beam_splitter(element.theta).on(modes)]
    if isinstance(element, ParallelSplitterElement):
        splitter = beam_splitter(element.theta)
        return [
            splitter.on([registry.index(beam, pol) for beam in element.beams])
            for pol in ("H", "V")
        ]
    modes = [registry.index(beam, element.polarization) for beam in element.beams]
    return [symmetric_multiport(element.size).on(modes)]


def circuit_unitary(spec: CircuitSpec) -> np.ndarray:
    """Single-photon unitary of all elements over the full registry."""
    registry = spec.registry
    total = np.eye(len(registry), dtype=complex)
    for element in spec.elements:
        for transform in element_transforms(element, registry):
            total = transform.full_matrix(len(registry)) @ total
    return total


def outcome_predicate(spec: CircuitSpec) -> Callable[[Occupation], bool]:
    """Predicate on output occupations selecting the joint post-selection outcome."""
    registry = spec.registry
    vacuum_modes: list[int] = []
    counts: list[tuple[list[int], int]] = []
    for block in spec.postselect:
        if isinstance(block, VacuumBlock):
            vacuum_modes += [registry.index(b, p) for b, p in block.vacuum]
        else:
            counts += [(registry.beam_modes(b), n) for b, n in block.coincidence]

    def selected(occupation: Occupation) -> bool:
        return all(occupation[m] == 0 for m in vacuum_modes) and all(
            sum(occupation[m] for m in modes) == n for modes, n in counts
        )

    return selected
