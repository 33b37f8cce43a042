"""Experiments module.

End-to-end schemes: four-photon spin-1 state generation from two EPR pairs,
the telecloning-state stage, and the N-pair generalization through
symmetric multiports. Each scheme compiles to a CircuitSpec and runs
through the circuit evaluator; results are ExperimentReport records.
"""

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np
from pydantic import BaseModel, Field
from tqdm import tqdm

from .circuit import (
    CircuitResult,
    CircuitSpec,
    circuit_unitary,
    evaluate_circuit,
    initial_state,
    outcome_predicate,
)
from .config import (
    DEFAULT_CROSSCHECK_TRIALS,
    DEFAULT_MAX_MODES,
    DEFAULT_MAX_PHOTONS,
    DEFAULT_SEED,
    DENSE_MAX_ENTRIES,
    FOUR_PHOTON_BEAMS,
    MAX_PRACTICAL_PAIRS,
    ORACLE_TOLERANCE,
    RANDOM_STATE_MAX_TERMS,
    TELECLONING_OUTPUT_BEAMS,
)
from .core.fock import FockState, ModeRegistry
from .core.linops import ExpansionEngine, ModeTransform, haar_unitary
from .core.oracle import dense_apply
from .interfaces import AmplitudeEngineABC
from .targets import fidelity

logger = logging.getLogger(__name__)


class ExperimentError(Exception):
    """Base exception for experiment errors."""
    pass


class ReportParameters(BaseModel):
    """Scheme parameters echoed in a report."""
    theta: float | None = None
    pairs: int | None = None
    chained: bool | None = None


class ExperimentReport(BaseModel):
    """Outcome record of one scheme run.

    Attributes:
        scheme: Scheme name.
        parameters: Scheme parameters.
        success_probability: Product of all post-selection probabilities.
        fidelity: Fidelity to the target; None when the scheme failed.
        stage_probabilities: Conditional probability of each post-selection stage.
        reference_probability: Closed-form success probability, when known.
        term_count: Terms in the heralded output state.
        wall_time_ms: Wall-clock duration of the run.
    """
    scheme: str
    parameters: ReportParameters = Field(default_factory=ReportParameters)
    success_probability: float = Field(ge=0.0, le=1.0)
    fidelity: float | None = Field(default=None, ge=0.0, le=1.0)
    stage_probabilities: list[float] = Field(default_factory=list)
    reference_probability: float | None = None
    term_count: int = 0
    wall_time_ms: float = 0.0

    @property
    def succeeded(self) -> bool:
        """True when the heralding succeeded with nonzero probability."""
        return self.success_probability > 0.0


@dataclass
class SchemeRun:
    """A report together with the state it describes.

    Attributes:
        report: The serializable report.
        state: Final normalized (or zero) state.
        circuit: The compiled circuit.
    """
    report: ExperimentReport
    state: FockState
    circuit: CircuitSpec


class ScanRow(NamedTuple):
    """One grid point of a theta scan."""
    theta: float
    probability: float
    fidelity: float | None


# -- closed forms ---------------------------------------------------------------


def four_photon_probability(theta: float) -> float:
    """Heralding probability 3 sin^4(theta) cos^4(theta)."""
    return 3 * math.sin(theta) ** 4 * math.cos(theta) ** 4


def generalized_probability(pairs: int) -> float:
    """Heralding probability (N+1)(N!)^2 / (2^N N^(2N)) of the N-pair scheme."""
    if pairs < 1:
        raise ExperimentError(f"Need at least one pair, got {pairs}")
    exact = Fraction(
        (pairs + 1) * math.factorial(pairs) ** 2,
        2 ** pairs * pairs ** (2 * pairs),
    )
    return float(exact)


# -- circuit compilers ------------------------------------------------------------


def four_photon_circuit(theta: float) -> dict:
    """Two EPR pairs, four equal splitters, vacuum heralding on beams 3 and 4."""
    b1, b2, b3, b4 = FOUR_PHOTON_BEAMS
    return {
        "beams": list(FOUR_PHOTON_BEAMS),
        "pairs": [[b1, b2], [b3, b4]],
        "elements": [
            {"kind": "splitter", "theta": theta, "modes": [[b1, "H"], [b3, "H"]]},
            {"kind": "splitter", "theta": theta, "modes": [[b1, "V"], [b3, "V"]]},
            {"kind": "splitter", "theta": theta, "modes": [[b2, "H"], [b4, "H"]]},
            {"kind": "splitter", "theta": theta, "modes": [[b2, "V"], [b4, "V"]]},
        ],
        "postselect": [
            {"vacuum": [[b3, "H"], [b3, "V"], [b4, "H"], [b4, "V"]]},
        ],
        "target": {"name": "spin-j", "pairs": 2, "beams": [b1, b2]},
    }


def telecloning_circuit(chained: bool = False) -> dict:
    """Split each beam of the spin-1 state and keep four-fold coincidences.

    In chained mode the spin-1 state is itself produced by the four-photon
    circuit at theta = pi/4; otherwise it is the exact input state.
    """
    out1, out2, out3, out4 = TELECLONING_OUTPUT_BEAMS
    symmetric = math.pi / 4
    splitters = [
        {"kind": "parallel_splitter", "theta": symmetric, "beams": [out1, out2]},
        {"kind": "parallel_splitter", "theta": symmetric, "beams": [out3, out4]},
    ]
    coincidence = {"coincidence": [[b, 1] for b in TELECLONING_OUTPUT_BEAMS]}
    target = {"name": "telecloning", "beams": list(TELECLONING_OUTPUT_BEAMS)}
    if not chained:
        return {
            "beams": [out1, out3, out2, out4],
            "initial_state": {"name": "spin-j", "pairs": 2, "beams": [out1, out3]},
            "elements": splitters,
            "postselect": [coincidence],
            "target": target,
        }
    stage_one = four_photon_circuit(symmetric)
    extra = [b for b in TELECLONING_OUTPUT_BEAMS if b not in stage_one["beams"]]
    return {
        "beams": stage_one["beams"] + extra,
        "pairs": stage_one["pairs"],
        "elements": stage_one["elements"] + splitters,
        "postselect": stage_one["postselect"] + [coincidence],
        "target": target,
    }


def generalized_circuit(pairs: int) -> dict:
    """N EPR pairs through four symmetric N-ports, vacuum on outputs 1..N-1."""
    if pairs < 1:
        raise ExperimentError(f"Need at least one pair, got {pairs}")
    beams = [str(i) for i in range(1, 2 * pairs + 1)]
    odd, even = beams[0::2], beams[1::2]
    elements = [
        {"kind": "multiport", "size": pairs, "beams": group, "polarization": pol}
        for group, pol in ((odd, "H"), (odd, "V"), (even, "H"), (even, "V"))
    ]
    detected = [[b, pol] for b in odd[1:] + even[1:] for pol in ("H", "V")]
    return {
        "beams": beams,
        "pairs": [[a, b] for a, b in zip(odd, even)],
        "elements": elements,
        "postselect": [{"vacuum": detected}] if detected else [],
        "target": {"name": "spin-j", "pairs": pairs, "beams": [odd[0], even[0]]},
    }


# -- runners ------------------------------------------------------------------------


def run_circuit(
    spec: CircuitSpec,
    scheme: str,
    parameters: ReportParameters | None = None,
    reference_probability: float | None = None,
    engine: AmplitudeEngineABC | None = None,
) -> SchemeRun:
    """Evaluate a circuit and package the result as a report.

    Args:
        spec: Validated circuit.
        scheme: Scheme name for the report.
        parameters: Parameters to echo.
        reference_probability: Closed-form probability, if any.
        engine: Amplitude engine; expansion engine when None.

    Returns:
        SchemeRun with report and final state.
    """
    start = time.perf_counter()
    result: CircuitResult = evaluate_circuit(spec, engine=engine)
    probability = min(max(result.success_probability, 0.0), 1.0)
    target_fidelity = None
    if result.succeeded and spec.target is not None:
        target_fidelity = fidelity(spec.target.build().state, result.state)
    elapsed_ms = (time.perf_counter() - start) * 1000.0

    report = ExperimentReport(
        scheme=scheme,
        parameters=parameters or ReportParameters(),
        success_probability=probability,
        fidelity=target_fidelity,
        stage_probabilities=[min(p, 1.0) for p in result.stage_probabilities],
        reference_probability=reference_probability,
        term_count=len(result.state),
        wall_time_ms=elapsed_ms,
    )
    if result.succeeded:
        logger.info(
            f"{scheme}: p={probability:.12g} fidelity={target_fidelity} ({elapsed_ms:.1f} ms)"
        )
    else:
        logger.warning(f"{scheme}: heralding never succeeds (p=0)")
    return SchemeRun(report=report, state=result.state, circuit=spec)


def run_four_photon(theta: float, engine: AmplitudeEngineABC | None = None) -> SchemeRun:
    """Four-photon spin-1 generation at splitter angle theta."""
    return run_circuit(
        CircuitSpec.model_validate(four_photon_circuit(theta)),
        "four-photon",
        ReportParameters(theta=theta),
        four_photon_probability(theta),
        engine,
    )


def four_photon_scheme(theta: float) -> ExperimentReport:
    """Report of the four-photon scheme; see run_four_photon."""
    return run_four_photon(theta).report


def run_telecloning(chained: bool = False, engine: AmplitudeEngineABC | None = None) -> SchemeRun:
    """Telecloning-state stage, from the exact spin-1 input or chained."""
    reference = 0.25 * (four_photon_probability(math.pi / 4) if chained else 1.0)
    return run_circuit(
        CircuitSpec.model_validate(telecloning_circuit(chained)),
        "telecloning",
        ReportParameters(theta=math.pi / 4, chained=chained),
        reference,
        engine,
    )


def telecloning_scheme(chained: bool = False) -> ExperimentReport:
    """Report of the telecloning stage; see run_telecloning."""
    return run_telecloning(chained).report


def run_generalized(pairs: int, engine: AmplitudeEngineABC | None = None) -> SchemeRun:
    """N-pair scheme producing two entangled spin-N/2 systems."""
    if pairs < 1:
        raise ExperimentError(f"Need at least one pair, got {pairs}")
    if pairs > MAX_PRACTICAL_PAIRS:
        logger.warning(
            f"N={pairs} exceeds the practical bound {MAX_PRACTICAL_PAIRS}; expect a long run"
        )
    return run_circuit(
        CircuitSpec.model_validate(generalized_circuit(pairs)),
        "generalized",
        ReportParameters(pairs=pairs),
        generalized_probability(pairs),
        engine,
    )


def generalized_scheme(pairs: int) -> ExperimentReport:
    """Report of the N-pair scheme; see run_generalized."""
    return run_generalized(pairs).report


def sweep_pairs(max_pairs: int, workers: int = 1) -> list[ExperimentReport]:
    """Run the generalized scheme for N = 1..max_pairs, in N order."""
    if max_pairs < 1:
        raise ExperimentError(f"Need at least one pair, got {max_pairs}")
    values = list(range(1, max_pairs + 1))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(generalized_scheme, values))
    else:
        reports = [generalized_scheme(n) for n in values]
    for n, report in zip(values, reports):
        logger.info(
            f"N={n}: p={report.success_probability:.12g} "
            f"closed form {report.reference_probability:.12g}"
        )
    return reports


def _scan_point(theta: float) -> ScanRow:
    report = four_photon_scheme(theta)
    return ScanRow(theta, report.success_probability, report.fidelity)


def scan_theta(
    start: float,
    end: float,
    steps: int,
    workers: int = 1,
    progress: bool = False,
) -> list[ScanRow]:
    """Run the four-photon scheme on a uniform theta grid.

    Args:
        start: First angle (radians).
        end: Last angle (radians).
        steps: Number of grid points, at least 2.
        workers: Process count; rows keep grid order for any value.
        progress: Show a tqdm progress bar.

    Returns:
        Rows (theta, probability, fidelity) in grid order.

    Raises:
        ExperimentError: If the grid is invalid.
    """
    if steps < 2:
        raise ExperimentError(f"A scan needs at least 2 points, got {steps}")
    if not (math.isfinite(start) and math.isfinite(end)):
        raise ExperimentError(f"Scan bounds must be finite, got [{start}, {end}]")
    grid = [float(t) for t in np.linspace(start, end, steps)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(tqdm(pool.map(_scan_point, grid), total=steps, desc="Scanning",
                             unit="pt", disable=not progress))
    else:
        rows = [_scan_point(t) for t in tqdm(grid, desc="Scanning", unit="pt", disable=not progress)]

    deviation = max(abs(r.probability - four_photon_probability(r.theta)) for r in rows)
    logger.info(
        f"Scanned {steps} points on [{start:.6g}, {end:.6g}]; "
        f"max deviation from closed form {deviation:.3e}"
    )
    return rows


# -- oracle cross-checks -------------------------------------------------------------


def oracle_probability(spec: CircuitSpec, max_entries: int = DENSE_MAX_ENTRIES) -> float:
    """Joint post-selection probability of a circuit by the permanent oracle.

    Only output occupations passing every post-selection block are evaluated.
    """
    heralded = dense_apply(
        initial_state(spec),
        circuit_unitary(spec),
        support=outcome_predicate(spec),
        max_entries=max_entries,
    )
    return heralded.norm_squared()


@dataclass(frozen=True)
class CrosscheckSummary:
    """Result of the randomized engine-versus-oracle comparison.

    Attributes:
        trials: Number of random circuits.
        max_modes: Mode bound.
        max_photons: Photon bound.
        seed: Base seed.
        max_deviation: Largest amplitude difference seen.
        worst_trial: Trial index with the largest difference.
        tolerance: Pass threshold.
    """
    trials: int
    max_modes: int
    max_photons: int
    seed: int
    max_deviation: float
    worst_trial: int
    tolerance: float

    @property
    def passed(self) -> bool:
        """True when every deviation is below tolerance."""
        return self.max_deviation < self.tolerance

    def render(self) -> str:
        """Deterministic text summary."""
        return (
            f"trials={self.trials} max_modes={self.max_modes} "
            f"max_photons={self.max_photons} seed={self.seed}\n"
            f"max_deviation={self.max_deviation:.6e} worst_trial={self.worst_trial}\n"
            f"tolerance={self.tolerance:.1e} status={'PASS' if self.passed else 'FAIL'}\n"
        )


def random_state(registry: ModeRegistry, photons: int, rng: np.random.Generator) -> FockState:
    """Normalized random superposition of up to a few n-photon occupations."""
    size = len(registry)
    count = int(rng.integers(1, RANDOM_STATE_MAX_TERMS + 1))
    terms = [
        (rng.multinomial(photons, [1.0 / size] * size),
         complex(rng.normal(), rng.normal()))
        for _ in range(count)
    ]
    state = FockState.from_terms(registry, terms)
    if state.is_zero:
        return FockState.basis(registry, terms[0][0])
    return state.normalize()[0]


def random_circuit(
    mode_count: int, rng: np.random.Generator, max_elements: int = 3
) -> list[ModeTransform]:
    """A short sequence of Haar-random transforms on random mode subsets."""
    transforms = []
    for _ in range(int(rng.integers(1, max_elements + 1))):
        width = int(rng.integers(1, mode_count + 1))
        modes = sorted(int(m) for m in rng.choice(mode_count, size=width, replace=False))
        transforms.append(ModeTransform(haar_unitary(width, rng), tuple(modes)))
    return transforms


def crosscheck_trial(args: tuple[int, int, int, int]) -> float:
    """Max amplitude deviation between the engine and the oracle on one random circuit."""
    trial, max_modes, max_photons, seed = args
    rng = np.random.default_rng([seed, trial])
    mode_count = int(rng.integers(1, max_modes + 1))
    photons = int(rng.integers(0, max_photons + 1))
    registry = ModeRegistry(tuple((str(i // 2), "HV"[i % 2]) for i in range(mode_count)))
    state = random_state(registry, photons, rng)
    transforms = random_circuit(mode_count, rng)

    engine = ExpansionEngine()
    evolved = state
    total = np.eye(mode_count, dtype=complex)
    for transform in transforms:
        evolved = engine.apply(evolved, transform)
        total = transform.full_matrix(mode_count) @ total
    dense = dense_apply(state, total)

    keys = set(evolved.terms) | set(dense.terms)
    return max((abs(evolved.amplitude(k) - dense.amplitude(k)) for k in keys), default=0.0)


def run_crosscheck(
    trials: int = DEFAULT_CROSSCHECK_TRIALS,
    max_modes: int = DEFAULT_MAX_MODES,
    max_photons: int = DEFAULT_MAX_PHOTONS,
    seed: int = DEFAULT_SEED,
    workers: int = 1,
    tolerance: float = ORACLE_TOLERANCE,
    progress: bool = False,
) -> CrosscheckSummary:
    """Compare the expansion engine with the permanent oracle on random circuits.

    Each trial draws its own generator from (seed, trial index), so results do
    not depend on the worker count.

    Raises:
        ExperimentError: If a bound is not positive (photons may be 0).
    """
    if trials < 1 or max_modes < 1 or max_photons < 0:
        raise ExperimentError(
            f"Invalid cross-check bounds: trials={trials}, max_modes={max_modes}, "
            f"max_photons={max_photons}"
        )
    jobs = [(t, max_modes, max_photons, seed) for t in range(trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            deviations = list(pool.map(crosscheck_trial, jobs))
    else:
        deviations = [
            crosscheck_trial(job)
            for job in tqdm(jobs, desc="Cross-checking", unit="trial", disable=not progress)
        ]
    worst = int(np.argmax(deviations))
    summary = CrosscheckSummary(
        trials=trials,
        max_modes=max_modes,
        max_photons=max_photons,
        seed=seed,
        max_deviation=float(deviations[worst]),
        worst_trial=worst,
        tolerance=tolerance,
    )
    logger.info(f"Cross-check: max deviation {summary.max_deviation:.3e} over {trials} trials")
    return summary
