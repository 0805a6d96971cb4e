"""Per-trial suite runners behind the command-line subcommands.

Every trial draws from its own counter-based generator, so results do not
depend on the number of worker threads or on scheduling order.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, TypeVar

import numpy as np
import scipy.optimize

from unitary_finsler.config import ExperimentConfig
from unitary_finsler.errors import (
    ComponentMismatch,
    EigenvalueAtMinusOne,
    NormOne,
    NormTooLarge,
    NumericalDomainError,
    OutOfDomain,
)
from unitary_finsler.geodesics import (
    GeodesicProbe,
    Verdict,
    compression_limit_probe,
    convexity_probe,
    convexity_radius,
    random_competitor_length,
    random_probe,
    rectifiable_distance,
)
from unitary_finsler.linalg import adjoint, as_hermitian, mat_exp, principal_log_unitary
from unitary_finsler.matrix_io import read_matrix
from unitary_finsler.nilpotent import (
    AntiSymTangent,
    antisymmetric_minimal_lifting,
    antisymmetry_check,
    build_context,
    nilpotent_cross_section,
)
from unitary_finsler.norms import FinslerNorm, NormKind, check_hessian_properties, operator_norm
from unitary_finsler.orbits import (
    MinimalLifting,
    OrbitTangent,
    SpectralDecomposition,
    commutator_decay,
    complete_block,
    cross_section_theta,
    delta,
    derivation_gap,
    derivation_gap_report,
    dkw_complete,
    minimal_lifting,
    minimality_probe,
    orbit_competitor_length,
    quotient_norm,
)
from unitary_finsler.projections import assemble_minimal_z, direct_rotation, halmos_decompose, verify_codiagonal
from unitary_finsler.reporting import Check
from unitary_finsler.sampling import (
    near_identity_unitary,
    random_antihermitian,
    random_complex,
    random_hermitian,
    random_orbit_point,
    random_projection_pair,
    trial_generator,
)

LOGGER = logging.getLogger(__name__)

T = TypeVar("T")

OPERATOR_DOMAIN = np.pi / 2 - 0.05
GEODESIC_COMPETITORS = 20
ORBIT_COMPETITORS = 500
PROJECTION_COMPETITORS = 200
CERTIFICATE_DIRECTIONS = 50
RANDOM_LIFTINGS = 50
DERIVATION_SAMPLES = 50
DERIVATION_MAX_DIM = 16
COMPLETION_SAMPLES = 2000
NELDER_MEAD_LIMIT = 36
COMPRESSION_EXPONENTS = (4, 8, 16, 32, 64)


@dataclass
class TrialResult:
    rows: List[Dict[str, Any]] = field(default_factory=list)
    checks: List[Check] = field(default_factory=list)
    skipped: List[str] = field(default_factory=list)

    def check(self, suite: str, ok: bool, slack: float = math.inf) -> None:
        self.checks.append(Check(suite, bool(ok), float(slack)))


def ordered_map(func: Callable[[int], T], trials: int, threads: int) -> List[T]:
    """func over range(trials) in trial order; workers only affect wall time."""
    if threads <= 1:
        return [func(trial) for trial in range(trials)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, range(trials)))


def _probe_radius(config: ExperimentConfig) -> tuple[float, FinslerNorm]:
    norm = config.finsler_norm
    if norm.kind is NormKind.OPERATOR or norm.p < 4:
        return OPERATOR_DOMAIN, FinslerNorm.operator()
    radius = convexity_radius(norm.p).for_policy(config.radius_policy)
    ball_norm = FinslerNorm.operator() if norm.is_normalized else FinslerNorm.schatten(norm.p)
    return radius, ball_norm


def convexity_trial(config: ExperimentConfig, trial: int) -> TrialResult:
    rng = trial_generator(config.seed, trial)
    norm = config.finsler_norm
    result = TrialResult()
    radius, ball_norm = _probe_radius(config)
    probe = random_probe(rng, config.dim, radius, ball_norm)
    u = near_identity_unitary(rng, config.dim, 0.3)
    # the same probe, seen from u: u* beta(s) is the generated geodesic
    seen_from_u = GeodesicProbe(principal_log_unitary(u @ mat_exp(probe.v)), probe.z)
    try:
        report = convexity_probe(u, seen_from_u, norm, config.grid, config.radius_policy)
    except OutOfDomain as exc:
        LOGGER.debug("Trial %d skipped: %s", trial, exc)
        result.skipped.append("convexity")
        return result

    if norm.kind is NormKind.OPERATOR or norm.p >= 4:
        result.check("convexity", report.verdict is not Verdict.VIOLATED, report.min_second_difference)
    else:
        # the Frobenius profile is only reported
        result.skipped.append("convexity")
    if norm.kind is not NormKind.OPERATOR and norm.p >= 4 and not probe.is_constant:
        result.check("strict_convexity", report.flat_points <= 1, float(-report.flat_points))
    if report.inequality_slacks:
        worst = min(slack.worst_slack for slack in report.inequality_slacks)
        holds = all(slack.holds and slack.equality_consistent for slack in report.inequality_slacks)
        result.check("log_norm_chain", holds, worst)

    for index, s in enumerate(report.grid):
        interior = 0 < index < report.grid.size - 1
        slacks = report.inequality_slacks[index] if report.inequality_slacks else None
        result.rows.append(
            {
                "trial": trial,
                "s": float(s),
                "g": float(report.g_values[index]),
                "second_difference": float(report.second_differences[index - 1]) if interior else None,
                "lhs": slacks.lhs if slacks else None,
                "mid": slacks.mid if slacks else None,
                "rhs": slacks.rhs if slacks else None,
                "verdict": report.verdict.value,
            }
        )

    _hessian_checks(config, rng, result)
    _geodesic_competitors(config, rng, result)
    _compression_check(probe, result)
    return result


def _hessian_checks(config: ExperimentConfig, rng: np.random.Generator, result: TrialResult) -> None:
    for p in (4, 6):
        a = random_antihermitian(rng, config.dim, rng.uniform(0.2, 1.5))
        b = random_antihermitian(rng, config.dim, rng.uniform(0.2, 1.5))
        report = check_hessian_properties(a, b, p)
        result.check("hessian_properties", report.is_ok, min(report.property1_slack, -report.property2_gap))


def _geodesic_competitors(config: ExperimentConfig, rng: np.random.Generator, result: TrialResult) -> None:
    x = random_antihermitian(rng, config.dim, rng.uniform(0.1, 3.0))
    target = mat_exp(x)
    identity = np.eye(config.dim, dtype=np.complex128)
    for norm in (FinslerNorm.operator(), FinslerNorm.normalized(config.p)):
        direct = rectifiable_distance(identity, target, norm)
        worst = math.inf
        evaluated = 0
        for _ in range(GEODESIC_COMPETITORS):
            try:
                length = random_competitor_length(identity, target, norm, 0.5, rng)
            except EigenvalueAtMinusOne:
                continue
            evaluated += 1
            worst = min(worst, length - direct)
        if not evaluated:
            LOGGER.debug("No competitor path stayed on the log branch for %s", norm.label())
            result.skipped.append("geodesic_minimality")
            continue
        result.check("geodesic_minimality", worst >= -1e-6, worst)


def _compression_check(probe: GeodesicProbe, result: TrialResult) -> None:
    table = compression_limit_probe(probe, [probe.dim], COMPRESSION_EXPONENTS, normalized=False)
    result.check("p_limit", table.monotone_in_p() and table.within_dimension_factor())


def _finite_rank_base(config: ExperimentConfig, rng: np.random.Generator) -> np.ndarray:
    if config.matrix:
        return as_hermitian(read_matrix(config.matrix))
    rank = max(1, config.dim // 3)
    levels = np.cumsum(rng.uniform(0.3, 1.0, size=rank)) * rng.choice([-1.0, 1.0])
    return random_orbit_point(rng, np.concatenate([[0.0], levels]), [config.dim - rank] + [1] * rank)


def _competitor_slack(source, z: np.ndarray, rng: np.random.Generator, count: int) -> float:
    base = operator_norm(z)
    worst = math.inf
    for _ in range(count):
        worst = min(worst, orbit_competitor_length(source, z, rng) - base)
    return worst


def _counterexample_detected(source, lifting: MinimalLifting, rng: np.random.Generator) -> bool:
    """Push z_c off the minimum along i·1 (a kernel direction) and ask the probe to find the way back."""
    dim = lifting.z_c.shape[0]
    eps = min(0.3, 0.4 * (np.pi / 2 - lifting.quotient_norm))
    shift = 1j * eps * np.eye(dim)
    bad = MinimalLifting(lifting.z_c + shift, operator_norm(lifting.z_c + shift))
    entries = minimality_probe(source, bad, 0, rng, directions=[-shift])
    return min(entry.norm_slack for entry in entries) < -1e-9


def finite_rank_trial(config: ExperimentConfig, trial: int) -> TrialResult:
    rng = trial_generator(config.seed, trial)
    result = TrialResult()
    b = _finite_rank_base(config, rng)
    spectral = SpectralDecomposition.from_matrix(b)
    z = random_antihermitian(rng, spectral.dim, rng.uniform(0.2, 1.2))
    tangent = OrbitTangent.from_lifting(b, z)
    lifting = minimal_lifting(spectral, tangent, restarts=config.restarts, rng=rng)

    consistency = operator_norm(delta(b, lifting.z_c) - tangent.vector)
    result.check("lifting_consistency", consistency <= 1e-9 * max(1.0, operator_norm(tangent.vector)), -consistency)
    worst_random = min(
        operator_norm(z + spectral.kernel_direction(rng, rng.uniform(0.0, 2.0))) - lifting.quotient_norm
        for _ in range(RANDOM_LIFTINGS)
    )
    result.check("random_liftings", worst_random >= -1e-8, worst_random)

    gap = None
    block = spectral.distinguished_block
    if block is not None and spectral.n_blocks > 1:
        general = quotient_norm(spectral, tangent, free_blocks=[block], restarts=config.restarts, rng=rng)
        pipeline = operator_norm(complete_block(spectral, z, block))
        gap = abs(general - pipeline)
        result.check("cross_method", gap <= 1e-6 * max(1.0, pipeline), 1e-6 - gap)
    else:
        result.skipped.append("cross_method")

    norm_slack = log_slack = competitor = None
    if lifting.quotient_norm < np.pi / 2:
        lifting.certificate = minimality_probe(spectral, lifting, CERTIFICATE_DIRECTIONS, rng)
        norm_slack, log_slack = lifting.min_norm_slack, lifting.min_log_slack
        result.check("certificate", lifting.certified(), min(norm_slack + 1e-8, log_slack + 1e-7))
        result.check("counterexample_detected", _counterexample_detected(spectral, lifting, rng))
        competitor = _competitor_slack(spectral, lifting.z_c, rng, ORBIT_COMPETITORS)
        result.check("orbit_minimality", competitor >= -1e-6, competitor)
    else:
        result.skipped.append("certificate")

    _derivation_gap_check(spectral, rng, result)
    _cross_section_check(spectral, rng, result)
    _commutator_check(trial, result)
    result.rows.append(
        {
            "trial": trial,
            "mode": "finite-rank",
            "dim": spectral.dim,
            "quotient_norm": lifting.quotient_norm,
            "lifting_norm": operator_norm(z),
            "reference_norm": None,
            "cross_method_gap": gap,
            "min_norm_slack": norm_slack,
            "min_log_slack": log_slack,
            "min_competitor_slack": competitor,
            "unique": lifting.unique,
        }
    )
    return result


def _derivation_gap_check(spectral: SpectralDecomposition, rng: np.random.Generator, result: TrialResult) -> None:
    # the measured gap is an SVD of a dim² x dim² matrix
    if spectral.n_blocks < 2 or spectral.dim > DERIVATION_MAX_DIM:
        result.skipped.append("derivation_gap")
        return
    report = derivation_gap_report(spectral, rng, samples=DERIVATION_SAMPLES)
    LOGGER.debug("Operator-norm ratio %.3e against eigen gap %.3e", report.operator_ratio, report.eigen_gap)
    mismatch = abs(report.measured_gap - report.eigen_gap)
    result.check("derivation_gap", mismatch <= 1e-9 * max(1.0, report.eigen_gap), -mismatch)


def _cross_section_check(spectral: SpectralDecomposition, rng: np.random.Generator, result: TrialResult) -> None:
    if spectral.n_blocks < 2:
        return
    a = spectral.reconstruct()
    gap = derivation_gap(spectral)
    u = mat_exp(random_antihermitian(rng, spectral.dim, 0.1 * min(1.0, gap / max(1.0, operator_norm(a)))))
    theta = cross_section_theta(spectral, u)
    b = u @ a @ adjoint(u)
    error = operator_norm(theta @ a @ adjoint(theta) - b)
    gauge_error = operator_norm(cross_section_theta(spectral, u @ mat_exp(spectral.kernel_direction(rng, 0.5))) - theta)
    result.check("cross_section", error <= 1e-9 and gauge_error <= 1e-9, -max(error, gauge_error))


def _commutator_check(trial: int, result: TrialResult) -> None:
    k = (4, 16, 64)[trial % 3]
    value, bound = commutator_decay([1.0 / i for i in range(1, 65)], k)
    result.check("commutator_decay", value <= bound, bound - value)


def projection_trial(config: ExperimentConfig, trial: int) -> TrialResult:
    rng = trial_generator(config.seed, trial)
    result = TrialResult()
    n_angles = int(rng.integers(0, max(1, config.dim // 2) + 1))
    swaps = 1 if trial % 2 == 0 else 0
    corners = [int(rng.integers(0, 2)), swaps, swaps, int(rng.integers(0, 2))]
    while sum(corners) + 2 * n_angles < 2:
        n_angles += 1
    angles = rng.uniform(0.05, np.pi / 2 - 0.05, size=n_angles)
    p0, p1 = random_projection_pair(rng, corners, angles)
    z = assemble_minimal_z(p0, p1)
    size = operator_norm(z)
    halmos = halmos_decompose(p0, p1)
    widest = operator_norm(halmos.angle_operator) if halmos.angles.size else 0.0
    expected = max(widest, np.pi / 2 if swaps else 0.0)
    result.check("angle_norm", abs(size - expected) <= 1e-8, -abs(size - expected))

    error = operator_norm(mat_exp(z) @ p0 @ mat_exp(-z) - p1)
    result.check("conjugation", error <= 1e-8, -error)
    result.check("codiagonal", verify_codiagonal(p0, z))
    result.check("norm_bound", size <= np.pi / 2 + 1e-9, np.pi / 2 + 1e-9 - size)
    if swaps:
        result.check("norm_one_quarter_turn", abs(size - np.pi / 2) <= 1e-9, -abs(size - np.pi / 2))
    else:
        try:
            direct = direct_rotation(p0, p1)
        except NormOne:
            result.skipped.append("direct_rotation_agreement")
        else:
            conj_gap = operator_norm(mat_exp(direct) @ p0 @ mat_exp(-direct) - mat_exp(z) @ p0 @ mat_exp(-z))
            norm_gap = abs(operator_norm(direct) - size)
            result.check("direct_rotation_agreement", max(conj_gap, norm_gap) <= 1e-7, -max(conj_gap, norm_gap))

    mismatch = [corners[0], corners[1] + 1, corners[2], corners[3]]
    q0, q1 = random_projection_pair(rng, mismatch, angles)
    try:
        assemble_minimal_z(q0, q1)
        result.check("component_mismatch", False)
    except ComponentMismatch:
        result.check("component_mismatch", True)

    competitor = None
    spectral = SpectralDecomposition.from_matrix(p0)
    if spectral.n_blocks == 2 and size > 0:
        competitor = _competitor_slack(spectral, z, rng, PROJECTION_COMPETITORS)
        result.check("orbit_minimality", competitor >= -1e-6, competitor)
    result.rows.append(
        {
            "trial": trial,
            "mode": "projection",
            "dim": p0.shape[0],
            "quotient_norm": size,
            "lifting_norm": size,
            "reference_norm": operator_norm(p0 - p1),
            "cross_method_gap": None,
            "min_norm_slack": None,
            "min_log_slack": None,
            "min_competitor_slack": competitor,
            "unique": None,
        }
    )
    return result


def _scalar_closed_form_gap(rng: np.random.Generator) -> float:
    """|‖z0‖ - sqrt(((a - b)/2)² + c²)| for z11 = ia, z22 = ib, z12 = ic on the 2x2 orbit."""
    a, b, c = rng.uniform(-1.5, 1.5, size=3)
    z0 = antisymmetric_minimal_lifting(build_context(1), [[1j * a]], [[1j * c]], [[1j * b]])
    return abs(operator_norm(z0) - math.hypot((a - b) / 2, c))


def nilpotent_trial(config: ExperimentConfig, trial: int) -> TrialResult:
    rng = trial_generator(config.seed, trial)
    result = TrialResult()
    ctx = build_context(max(1, config.dim // 2))
    x0 = random_antihermitian(rng, ctx.n)
    x1 = random_antihermitian(rng, ctx.n)
    lifting = AntiSymTangent(x0, x1).minimal_lifting(ctx)
    scale = rng.uniform(0.2, 1.4) / max(lifting.quotient_norm, 1e-300)
    tangent = AntiSymTangent(scale * x0, scale * x1)
    lifting = tangent.minimal_lifting(ctx)

    spectrum = np.sort(np.linalg.eigvalsh(-1j * lifting.z_c))
    pairing = float(np.max(np.abs(spectrum + spectrum[::-1])))
    result.check("spectral_pairing", pairing <= 1e-10, -pairing)
    scalar_gap = _scalar_closed_form_gap(rng)
    result.check("scalar_closed_form", scalar_gap <= 1e-10, -scalar_gap)
    try:
        lifting.certificate = minimality_probe(ctx, lifting, CERTIFICATE_DIRECTIONS, rng)
    except NormTooLarge:
        result.skipped.append("certificate")
    else:
        result.check("certificate", lifting.certified(norm_tol=1e-9), lifting.min_norm_slack)
        result.check("counterexample_detected", _counterexample_detected(ctx, lifting, rng))
    competitor = _competitor_slack(ctx, lifting.z_c, rng, ORBIT_COMPETITORS)
    result.check("orbit_minimality", competitor >= -1e-6, competitor)

    u = near_identity_unitary(rng, ctx.dim, 0.2)
    b = u @ ctx.nilpotent @ adjoint(u)
    mu = nilpotent_cross_section(ctx, b)
    section_error = operator_norm(mu @ ctx.nilpotent @ adjoint(mu) - b)
    result.check("nilpotent_section", section_error <= 1e-8, -section_error)
    result.check("antisymmetry", antisymmetry_check(ctx, b, u @ tangent.vector @ adjoint(u)))
    result.rows.append(
        {
            "trial": trial,
            "mode": "nilpotent",
            "dim": ctx.dim,
            "quotient_norm": lifting.quotient_norm,
            "lifting_norm": lifting.quotient_norm,
            "reference_norm": None,
            "cross_method_gap": None,
            "min_norm_slack": lifting.min_norm_slack if lifting.certificate else None,
            "min_log_slack": lifting.min_log_slack if lifting.certificate else None,
            "min_competitor_slack": competitor,
            "unique": True,
        }
    )
    return result


def completion_search(x: np.ndarray, y: np.ndarray, z: np.ndarray, rng: np.random.Generator, samples: int) -> float:
    """Best completed norm found by random Hermitian Z' around z plus a Nelder-Mead descent."""
    m = z.shape[0]
    top = np.hstack([x, y])

    def completed(h: np.ndarray) -> float:
        return operator_norm(np.vstack([top, np.hstack([adjoint(y), h])]))

    def unpack(params: np.ndarray) -> np.ndarray:
        raw = params.reshape(m, m)
        return (raw + raw.T) / 2 + 1j * (raw - raw.T) / 2

    scale = max(operator_norm(z), 1.0)
    best = completed(z)
    start = z
    for _ in range(samples):
        candidate = z + random_hermitian(rng, m, scale * rng.uniform(1e-4, 1.0))
        value = completed(candidate)
        if value < best:
            best, start = value, candidate
    if m * m > NELDER_MEAD_LIMIT:
        return best
    initial = (start.real + start.imag).ravel()
    descent = scipy.optimize.minimize(
        lambda params: completed(unpack(params)),
        initial,
        method="Nelder-Mead",
        options={"maxiter": 2000, "xatol": 1e-12, "fatol": 1e-14},
    )
    return min(best, float(descent.fun))


def completion_trial(config: ExperimentConfig, trial: int) -> TrialResult:
    rng = trial_generator(config.seed, trial)
    result = TrialResult()
    rows = int(rng.integers(1, config.dim))
    cols = config.dim - rows
    x = random_hermitian(rng, rows, rng.uniform(0.1, 2.0))
    y = random_complex(rng, rows, cols) * rng.uniform(0.1, 2.0)
    completion = dkw_complete(x, y)
    full = np.block([[x, y], [adjoint(y), completion.z]])
    completed = operator_norm(full)
    parrott = max(operator_norm(np.hstack([x, y])), operator_norm(np.vstack([x, adjoint(y)])))
    result.check("parrott_bound", abs(completed - parrott) <= 1e-9 * max(1.0, parrott), -abs(completed - parrott))
    found = completion_search(x, y, completion.z, rng, COMPLETION_SAMPLES)
    improvement = completed - found
    result.check("completion_search", improvement <= 1e-6, 1e-6 - improvement)
    result.rows.append(
        {
            "trial": trial,
            "rows": rows,
            "cols": cols,
            "mu": completion.mu,
            "completed_norm": completed,
            "parrott_bound": parrott,
            "search_improvement": improvement,
        }
    )
    return result


LIFTING_TRIALS: Dict[str, Callable[[ExperimentConfig, int], TrialResult]] = {
    "finite-rank": finite_rank_trial,
    "projection": projection_trial,
    "nilpotent": nilpotent_trial,
}


def run_trials(
    config: ExperimentConfig, trial_fn: Callable[[ExperimentConfig, int], TrialResult]
) -> List[TrialResult]:
    LOGGER.debug("Running %d trial(s) on %d thread(s)", config.trials, config.threads)

    def guarded(trial: int) -> TrialResult:
        try:
            return trial_fn(config, trial)
        except NumericalDomainError as exc:
            LOGGER.warning("Trial %d failed: %s", trial, exc)
            failed = TrialResult()
            failed.check("trial_errors", False)
            return failed

    return ordered_map(guarded, config.trials, config.threads)
