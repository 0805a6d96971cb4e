"""Desk-scale experiments on unitary orbits with Finsler metrics."""
from __future__ import annotations

import argparse
import logging
import time
from typing import Any, Callable, Dict, List, Mapping, Sequence

import numpy as np

from unitary_finsler import __version__
from unitary_finsler.config import LIFTING_MODES, ExperimentConfig, build_config
from unitary_finsler.errors import ConfigError, MatrixFormatError
from unitary_finsler.experiments import (
    LIFTING_TRIALS,
    TrialResult,
    completion_trial,
    convexity_trial,
    nilpotent_trial,
    projection_trial,
    run_trials,
)
from unitary_finsler.matrix_io import read_matrix
from unitary_finsler.norms import operator_norm
from unitary_finsler.reporting import (
    COMPLETION_HEADERS,
    CONVEXITY_HEADERS,
    LIFTING_HEADERS,
    RunSummary,
    write_outputs,
)

LOGGER = logging.getLogger(__name__)

IO_CHECK_HEADERS = ["path", "dim", "operator_norm", "hermitian", "antihermitian", "unitary"]

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2


def _common_flags() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--config", type=str, help="JSON config file (overrides $UNITARY_FINSLER_CONFIG)")
    parent.add_argument("--seed", type=int, help="Base seed for the per-trial generators")
    parent.add_argument("--dim", type=int, help="Matrix dimension")
    parent.add_argument("--trials", type=int, help="Number of random instances")
    parent.add_argument("--p", type=int, help="Even Schatten exponent")
    parent.add_argument("--norm", choices=["operator", "schatten"], help="Finsler norm on the Lie algebra")
    parent.add_argument("--normalized", action="store_true", default=None, help="Use the trace-normalized Schatten norm")
    parent.add_argument("--grid", type=int, help="Grid points along each geodesic")
    parent.add_argument("--radius-policy", choices=["exact", "conservative"], help="Ball radius for the Schatten suites")
    parent.add_argument("--restarts", type=int, help="Random restarts of the quotient-norm solver")
    parent.add_argument("--matrix", type=str, help="Matrix file (io-check input, lifting base point)")
    parent.add_argument("--out", type=str, help="Output path; stdout when omitted")
    parent.add_argument("--format", choices=["csv", "json"], help="Table format")
    parent.add_argument("--timing", action="store_true", default=None, help="Include wall time in the summary")
    parent.add_argument("--verbose", action="store_true", help="Log at DEBUG level")
    return parent


def parse_args(argv: Sequence[str] | None = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(description=__doc__)
    commands = parser.add_subparsers(dest="command", required=True)
    parent = _common_flags()
    commands.add_parser("convexity", parents=[parent], help="Convexity of the geodesic distance along geodesics")
    lifting = commands.add_parser("lifting", parents=[parent], help="Quotient norms and minimal liftings")
    lifting.add_argument("--mode", choices=list(LIFTING_MODES), help="Orbit family")
    commands.add_parser("projection", parents=[parent], help="Minimal geodesics between projections")
    commands.add_parser("nilpotent", parents=[parent], help="Anti-symmetric tangents at the nilpotent orbit")
    commands.add_parser("completion", parents=[parent], help="Minimal-norm Hermitian completions")
    commands.add_parser("io-check", parents=[parent], help="Validate a matrix file")
    return parser.parse_args(argv)


def _flags(args: argparse.Namespace) -> Dict[str, Any]:
    skip = {"command", "config", "verbose"}
    return {key: value for key, value in vars(args).items() if key not in skip}


def _io_check(config: ExperimentConfig) -> tuple[List[Mapping[str, Any]], TrialResult]:
    if not config.matrix:
        raise ConfigError("io-check needs --matrix")
    matrix = read_matrix(config.matrix)
    dim = matrix.shape[0]
    scale = max(1.0, operator_norm(matrix))
    result = TrialResult()
    result.check("matrix_file", True)
    row = {
        "path": config.matrix,
        "dim": dim,
        "operator_norm": operator_norm(matrix),
        "hermitian": operator_norm(matrix - matrix.conj().T) <= 1e-12 * dim * scale,
        "antihermitian": operator_norm(matrix + matrix.conj().T) <= 1e-12 * dim * scale,
        "unitary": operator_norm(matrix.conj().T @ matrix - np.eye(dim)) <= 1e-10,
    }
    return [row], result


def _suite(command: str, config: ExperimentConfig) -> tuple[List[str], Callable[[ExperimentConfig, int], TrialResult]]:
    if command == "convexity":
        return CONVEXITY_HEADERS, convexity_trial
    if command == "lifting":
        return LIFTING_HEADERS, LIFTING_TRIALS[config.mode]
    if command == "projection":
        return LIFTING_HEADERS, projection_trial
    if command == "nilpotent":
        return LIFTING_HEADERS, nilpotent_trial
    return COMPLETION_HEADERS, completion_trial


def run_command(command: str, config: ExperimentConfig) -> int:
    summary = RunSummary(command=command, config=config.echo(), version=__version__)
    started = time.perf_counter()
    if command == "io-check":
        headers = IO_CHECK_HEADERS
        rows, result = _io_check(config)
        results = [result]
    else:
        if command == "lifting" and config.mode == "finite-rank" and config.matrix:
            # surface format errors before any worker starts
            read_matrix(config.matrix)
        headers, trial_fn = _suite(command, config)
        results = run_trials(config, trial_fn)
        rows = [row for result in results for row in result.rows]

    for result in results:
        summary.record(result.checks)
        for suite in result.skipped:
            summary.skip(suite)
    if config.timing:
        summary.elapsed_seconds = time.perf_counter() - started

    for name, tally in sorted(summary.suites.items()):
        log = LOGGER.info if tally.is_ok else LOGGER.warning
        log("Suite %s: %d passed, %d failed, %d skipped", name, tally.passed, tally.failed, tally.skipped)
    write_outputs(summary, headers, rows, config.out, config.format)
    return EXIT_OK if summary.is_ok else EXIT_FAILED


def main(argv: Sequence[str] | None = None) -> int:
    args = parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        config = build_config(_flags(args), args.config)
        return run_command(args.command, config)
    except (ConfigError, MatrixFormatError) as exc:
        LOGGER.error("%s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
