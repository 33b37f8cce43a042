#!/usr/bin/env python3
"""Main entry point for LinOptSim.

Command-line surface: run a named scheme or a circuit file, scan the
four-photon splitter angle, and cross-check the expansion engine against
the permanent oracle. Payloads go to --out or standard output; logs go to
standard error.
"""

import argparse
import json
import logging
import math
import sys
from collections.abc import Sequence
from pathlib import Path

import pandas as pd

from .circuit import CircuitError, load_circuit
from .config import (
    CSV_FLOAT_FORMAT,
    DEFAULT_CROSSCHECK_TRIALS,
    DEFAULT_MAX_MODES,
    DEFAULT_MAX_PHOTONS,
    DEFAULT_PAIRS,
    DEFAULT_SCAN_END,
    DEFAULT_SCAN_START,
    DEFAULT_SCAN_STEPS,
    DEFAULT_SEED,
    DEFAULT_THETA,
    ORACLE_TOLERANCE,
    SCAN_CSV_COLUMNS,
)
from .core.fock import FockStateError
from .core.linops import TransformError
from .core.measure import ProjectionError
from .core.oracle import OracleError
from .experiments import (
    ExperimentError,
    ExperimentReport,
    run_circuit,
    run_crosscheck,
    run_four_photon,
    run_generalized,
    run_telecloning,
    scan_theta,
)
from .targets import TargetStateError

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_ZERO_PROBABILITY = 2
EXIT_INTERRUPTED = 130

SCHEMES = ("four-photon", "telecloning", "generalized", "circuit-file")

INPUT_ERRORS = (
    CircuitError,
    ExperimentError,
    TargetStateError,
    OracleError,
    TransformError,
    ProjectionError,
    FockStateError,
    OSError,
)


class UsageError(Exception):
    """Raised for invalid command-line arguments."""
    pass


class _ArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of exiting, so usage errors map to exit 1."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(f"{self.prog}: {message}")


def setup_logging(verbose: bool = False, quiet: bool = False) -> None:
    """Configure logging for the application.

    Args:
        verbose: If True, set DEBUG level.
        quiet: If True, only warnings and errors are shown.
    """
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO

    logging.basicConfig(
        level=level,
        format="%(asctime)s | %(levelname)-8s | %(name)s | %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
        handlers=[
            logging.StreamHandler(sys.stderr),
        ],
    )

    logging.getLogger("concurrent.futures").setLevel(logging.WARNING)


def _common_options() -> argparse.ArgumentParser:
    common = _ArgumentParser(add_help=False)
    common.add_argument(
        "--out", "-o",
        type=Path,
        default=None,
        help="Output file (default: standard output)",
    )
    common.add_argument(
        "--format",
        choices=("json", "csv"),
        default=None,
        help="Payload format (default: json for run, csv for scan)",
    )
    common.add_argument(
        "--tolerance",
        type=float,
        default=ORACLE_TOLERANCE,
        help="Pass threshold for crosscheck deviations",
    )
    common.add_argument(
        "--parallel",
        type=int,
        default=1,
        help="Worker processes for scan and crosscheck",
    )
    common.add_argument(
        "--seed",
        type=int,
        default=DEFAULT_SEED,
        help="Random seed for crosscheck",
    )
    common.add_argument(
        "--verbose", "-v",
        action="store_true",
        help="Enable verbose logging",
    )
    common.add_argument(
        "--quiet", "-q",
        action="store_true",
        help="Only log warnings and errors; no progress bars",
    )
    return common


def parse_arguments(argv: Sequence[str] | None = None) -> argparse.Namespace:
    """Parse command-line arguments.

    Args:
        argv: Arguments without the program name; sys.argv when None.

    Returns:
        Namespace with parsed arguments.

    Raises:
        UsageError: If the arguments are invalid.
    """
    parser = _ArgumentParser(
        prog="linoptsim",
        description="LinOptSim: linear-optical entanglement generation simulator",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    common = _common_options()
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser(
        "run",
        parents=[common],
        help="Run a named scheme or a circuit file",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    run.add_argument("scheme", choices=SCHEMES, help="Scheme to run")
    angle = run.add_mutually_exclusive_group()
    angle.add_argument(
        "--theta",
        type=float,
        default=None,
        help=f"Splitter angle in radians (default: {DEFAULT_THETA})",
    )
    angle.add_argument(
        "--theta-degrees",
        type=float,
        default=None,
        help="Splitter angle in degrees",
    )
    run.add_argument(
        "--pairs", "-n",
        type=int,
        default=DEFAULT_PAIRS,
        help="Number of EPR pairs for the generalized scheme",
    )
    run.add_argument(
        "--chained",
        action="store_true",
        help="Telecloning from the generated four-photon state instead of the exact one",
    )
    run.add_argument(
        "--circuit",
        type=Path,
        default=None,
        help="Circuit JSON file for circuit-file",
    )

    scan = commands.add_parser(
        "scan",
        parents=[common],
        help="Scan the four-photon splitter angle",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    scan.add_argument("--from", dest="start", type=float, default=DEFAULT_SCAN_START,
                      help="First angle (radians)")
    scan.add_argument("--to", dest="end", type=float, default=DEFAULT_SCAN_END,
                      help="Last angle (radians)")
    scan.add_argument("--steps", type=int, default=DEFAULT_SCAN_STEPS,
                      help="Number of grid points")

    crosscheck = commands.add_parser(
        "crosscheck",
        parents=[common],
        help="Compare the expansion engine with the permanent oracle",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    crosscheck.add_argument("--trials", type=int, default=DEFAULT_CROSSCHECK_TRIALS,
                            help="Number of random circuits")
    crosscheck.add_argument("--max-modes", type=int, default=DEFAULT_MAX_MODES,
                            help="Largest number of modes")
    crosscheck.add_argument("--max-photons", type=int, default=DEFAULT_MAX_PHOTONS,
                            help="Largest photon number")

    args = parser.parse_args(argv)
    if args.parallel < 1:
        raise UsageError(f"--parallel must be at least 1, got {args.parallel}")
    if args.command == "run":
        if args.theta_degrees is not None:
            args.theta = math.radians(args.theta_degrees)
        elif args.theta is None:
            args.theta = DEFAULT_THETA
        if args.scheme == "circuit-file" and args.circuit is None:
            raise UsageError("run circuit-file needs --circuit PATH")
    return args


def _write(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")


def _report_frame(report: ExperimentReport) -> pd.DataFrame:
    row = {
        "scheme": report.scheme,
        "theta": report.parameters.theta,
        "pairs": report.parameters.pairs,
        "chained": report.parameters.chained,
        "success_probability": report.success_probability,
        "fidelity": report.fidelity,
        "stage_probabilities": ";".join(repr(p) for p in report.stage_probabilities),
        "reference_probability": report.reference_probability,
        "term_count": report.term_count,
        "wall_time_ms": report.wall_time_ms,
    }
    return pd.DataFrame([row])


def _write_frame(frame: pd.DataFrame, out: Path | None) -> None:
    if out is None:
        frame.to_csv(sys.stdout, float_format=CSV_FLOAT_FORMAT, index=False)
        sys.stdout.flush()
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(out, float_format=CSV_FLOAT_FORMAT, index=False)


def command_run(args: argparse.Namespace, logger: logging.Logger) -> int:
    """Execute `run`; exit 2 when heralding never succeeds."""
    if args.scheme == "four-photon":
        scheme_run = run_four_photon(args.theta)
    elif args.scheme == "telecloning":
        scheme_run = run_telecloning(chained=args.chained)
    elif args.scheme == "generalized":
        scheme_run = run_generalized(args.pairs)
    else:
        spec = load_circuit(args.circuit)
        scheme_run = run_circuit(spec, f"circuit-file:{args.circuit.stem}")

    report = scheme_run.report
    if args.format == "csv":
        _write_frame(_report_frame(report), args.out)
    else:
        _write(report.model_dump_json(indent=2) + "\n", args.out)

    if not report.succeeded:
        logger.warning("Heralding probability is zero; report written without fidelity")
        return EXIT_ZERO_PROBABILITY
    return EXIT_OK


def command_scan(args: argparse.Namespace, logger: logging.Logger) -> int:
    """Execute `scan`."""
    rows = scan_theta(
        args.start,
        args.end,
        args.steps,
        workers=args.parallel,
        progress=not args.quiet and sys.stderr.isatty(),
    )
    frame = pd.DataFrame(rows, columns=SCAN_CSV_COLUMNS)
    if args.format == "json":
        _write(json.dumps([row._asdict() for row in rows], indent=2) + "\n", args.out)
    else:
        _write_frame(frame, args.out)
    logger.info(f"Wrote {len(frame)} scan rows to {args.out or 'stdout'}")
    return EXIT_OK


def command_crosscheck(args: argparse.Namespace, logger: logging.Logger) -> int:
    """Execute `crosscheck`; exit 0 only when every deviation is below tolerance."""
    summary = run_crosscheck(
        trials=args.trials,
        max_modes=args.max_modes,
        max_photons=args.max_photons,
        seed=args.seed,
        workers=args.parallel,
        tolerance=args.tolerance,
        progress=not args.quiet and sys.stderr.isatty(),
    )
    _write(summary.render(), args.out)
    if not summary.passed:
        logger.error(
            f"Cross-check failed: deviation {summary.max_deviation:.3e} "
            f"at trial {summary.worst_trial}"
        )
        return EXIT_INPUT_ERROR
    return EXIT_OK


COMMANDS = {
    "run": command_run,
    "scan": command_scan,
    "crosscheck": command_crosscheck,
}


def main(argv: Sequence[str] | None = None) -> int:
    """Main entry point.

    Args:
        argv: Arguments without the program name; sys.argv when None.

    Returns:
        Exit code: 0 success, 1 input error, 2 zero-probability heralding,
        130 interrupted.
    """
    logger = logging.getLogger("linoptsim")
    try:
        args = parse_arguments(argv)
    except UsageError as e:
        setup_logging()
        logger.error(f"{e}")
        return EXIT_INPUT_ERROR

    setup_logging(args.verbose, args.quiet)
    logger.debug(f"Arguments: {vars(args)}")

    try:
        return COMMANDS[args.command](args, logger)
    except KeyboardInterrupt:
        logger.warning("Interrupted by user")
        return EXIT_INTERRUPTED
    except INPUT_ERRORS as e:
        logger.error(f"{e}")
        return EXIT_INPUT_ERROR
    except Exception as e:
        logger.exception(f"Fatal error: {e}")
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
