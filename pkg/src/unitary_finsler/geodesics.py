"""Geodesics of the unitary group and convexity of the rectifiable distance along them.

A probe (v, z) stands for the geodesic s -> beta(s) = e^v e^{sz}, s in [0, 1].
Its logarithm w_s = log(beta(s)) drives everything here: f_p(s) = ‖w_s‖_p^p,
g_p = f_p^{1/p}, and the operator-norm distance g(s) = ‖w_s‖.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
import scipy.optimize

from unitary_finsler.errors import DomainError, EigenvalueAtMinusOne, OutOfDomain, SingularTransport
from unitary_finsler.linalg import adjoint, as_antihermitian, as_unitary, commutator, dexp_inverse, mat_exp, principal_log_unitary
from unitary_finsler.norms import FinslerNorm, NormKind, hessian_form, operator_norm, schatten_norm
from unitary_finsler.sampling import random_antihermitian

LOGGER = logging.getLogger(__name__)

BRANCH_MARGIN = np.pi - 0.01
CONVEX_TOLERANCE = -1e-7
STRICT_TOLERANCE = 1e-10
CONSERVATIVE_CAP = np.pi / 4 - 1e-6


@dataclass(frozen=True, eq=False)
class GeodesicProbe:
    v: np.ndarray
    z: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "v", as_antihermitian(self.v))
        object.__setattr__(self, "z", as_antihermitian(self.z))

    @property
    def dim(self) -> int:
        return self.v.shape[0]

    @property
    def is_constant(self) -> bool:
        return operator_norm(self.z) == 0.0

    def beta(self, s: float) -> np.ndarray:
        return mat_exp(self.v) @ mat_exp(s * self.z)

    def translated(self, u: np.ndarray) -> "GeodesicProbe":
        """The same geodesic seen from u: u* beta(s) = e^{v'} e^{sz}."""
        return GeodesicProbe(principal_log_unitary(adjoint(u) @ mat_exp(self.v)), self.z)

    def commutes(self, tol: float = 1e-12) -> bool:
        scale = max(1.0, operator_norm(self.v) * operator_norm(self.z))
        return operator_norm(commutator(self.v, self.z)) <= tol * scale

    def on_prolongation(self) -> bool:
        """True when 1 lies on the line through beta: v, z commute and v is a real multiple of z."""
        if self.is_constant or not self.commutes():
            return False
        coefficient = np.real(np.vdot(self.z, self.v)) / np.real(np.vdot(self.z, self.z))
        residual = operator_norm(self.v - coefficient * self.z)
        return residual <= 1e-12 * max(1.0, operator_norm(self.v))


def random_probe(
    rng: np.random.Generator, dim: int, radius: float, ball_norm: Optional[FinslerNorm] = None
) -> GeodesicProbe:
    """A probe (v, z) whose log curve stays inside the ball of the given radius.

    ‖w_s‖ <= ‖v‖ + s‖z‖ for every unitarily invariant norm within the log branch,
    so splitting 0.9*radius between v and z keeps every w_s inside.
    """
    share = rng.uniform(0.1, 0.9)
    total = 0.9 * radius
    v = random_antihermitian(rng, dim, share * total, ball_norm)
    z = random_antihermitian(rng, dim, (1 - share) * total, ball_norm)
    return GeodesicProbe(v, z)


class Verdict(str, enum.Enum):
    CONVEX = "convex"
    STRICTLY_CONVEX = "strictly_convex"
    VIOLATED = "violated"
    OUT_OF_DOMAIN = "out_of_domain"


@dataclass
class LogNormChainSlacks:
    """The three members of (p-1)f'^2 <= p f f''/sinc(2‖w‖) <= p(p-1) f f''."""

    lhs: float
    mid: float
    rhs: float
    f: float
    f_prime: float
    f_second: float

    @property
    def tolerance(self) -> float:
        return 1e-8 * max(abs(self.lhs), abs(self.mid), abs(self.rhs), 1.0)

    @property
    def holds(self) -> bool:
        return self.lhs <= self.mid + self.tolerance and self.mid <= self.rhs + self.tolerance

    @property
    def equality_consistent(self) -> bool:
        if self.rhs - self.mid < self.tolerance:
            return abs(self.f_second) < self.tolerance
        return True

    @property
    def worst_slack(self) -> float:
        return min(self.mid - self.lhs, self.rhs - self.mid)


@dataclass
class ConvexityReport:
    grid: np.ndarray
    g_values: np.ndarray
    second_differences: np.ndarray
    min_second_difference: float
    inequality_slacks: List[LogNormChainSlacks] = field(default_factory=list)
    verdict: Verdict = Verdict.CONVEX

    @property
    def flat_points(self) -> int:
        return int(np.sum(self.second_differences < STRICT_TOLERANCE))

    @property
    def is_ok(self) -> bool:
        return self.verdict in (Verdict.CONVEX, Verdict.STRICTLY_CONVEX)


@dataclass(frozen=True)
class ConvexityRadius:
    exact: float
    conservative: float

    def for_policy(self, policy: str) -> float:
        if policy == "exact":
            return self.exact
        if policy == "conservative":
            return self.conservative
        raise DomainError(f"unknown radius policy {policy!r}")


@dataclass(frozen=True)
class FpDerivatives:
    f: float
    f_prime: float
    f_second: float
    w_norm_p: float
    w_norm_op: float


def geodesic_point(u: np.ndarray, z: np.ndarray, t: float) -> np.ndarray:
    return u @ mat_exp(t * as_antihermitian(z))


def rectifiable_distance(u1: np.ndarray, u2: np.ndarray, norm: FinslerNorm) -> float:
    """‖log(u1* u2)‖ in the chosen norm."""
    return norm.of(principal_log_unitary(adjoint(as_unitary(u1)) @ as_unitary(u2)))


def log_curve(probe: GeodesicProbe, s: float) -> tuple[np.ndarray, np.ndarray]:
    """(w_s, wdot_s) with e^{w_s} = beta(s) and dexp_transport(w_s, wdot_s) = z."""
    if probe.commutes():
        w = probe.v + s * probe.z
        if operator_norm(w) < BRANCH_MARGIN:
            return w, probe.z
    w = principal_log_unitary(probe.beta(s))
    return w, dexp_inverse(w, probe.z)


def f_p_derivatives(probe: GeodesicProbe, s: float, p: int, norm: Optional[FinslerNorm] = None) -> FpDerivatives:
    """f_p(s) = ‖w_s‖_p^p and its first two derivatives (trace-normalized when ``norm`` is)."""
    w, wdot = log_curve(probe, s)
    factor = norm.trace_factor(probe.dim) if norm is not None else 1.0
    selector = FinslerNorm.normalized(p) if factor != 1.0 else FinslerNorm.schatten(p)
    w_norm_p = schatten_norm(w, selector)
    f = w_norm_p**p
    f_prime = factor * hessian_form(w, wdot, w, p) / (p - 1)
    f_second = factor * hessian_form(w, wdot, probe.z, p)
    return FpDerivatives(f, f_prime, f_second, w_norm_p, operator_norm(w))


def g_p_second_derivative(derivatives: FpDerivatives, p: int) -> float:
    """(1/p²) f^{1/p-2} [p f f'' - (p-1) f'^2]."""
    f, f1, f2 = derivatives.f, derivatives.f_prime, derivatives.f_second
    return f ** (1.0 / p - 2.0) * (p * f * f2 - (p - 1) * f1 * f1) / (p * p)


def sinc(r: float) -> float:
    """sin(r)/r with sinc(0) = 1."""
    return float(np.sinc(r / np.pi))


def sinc_inverse(y: float) -> float:
    """The r in [0, pi] with sinc(r) = y, by bisection."""
    if not 0.0 < y <= 1.0:
        raise DomainError(f"sinc_inverse needs y in (0, 1], got {y}")
    if y == 1.0:
        return 0.0
    return float(scipy.optimize.bisect(lambda r: sinc(r) - y, 0.0, np.pi, xtol=1e-13, maxiter=200))


def convexity_radius(p: int) -> ConvexityRadius:
    if p < 4 or p % 2:
        raise DomainError(f"convexity radius needs an even p >= 4, got {p}")
    exact = 0.5 * sinc_inverse(1.0 / (p - 1))
    return ConvexityRadius(exact=exact, conservative=min(exact, CONSERVATIVE_CAP))


def _ball_measure(w: np.ndarray, p: int, norm: Optional[FinslerNorm]) -> float:
    # finite-trace mode measures the ball in the operator norm
    if norm is not None and norm.is_normalized:
        return operator_norm(w)
    return schatten_norm(w, FinslerNorm.schatten(p))


def verify_log_norm_chain(
    probe: GeodesicProbe, s: float, p: int, norm: Optional[FinslerNorm] = None, radius_policy: str = "conservative"
) -> LogNormChainSlacks:
    if probe.is_constant:
        raise OutOfDomain("constant geodesic (z = 0)")
    if probe.on_prolongation():
        raise OutOfDomain("1 lies on a prolongation of the geodesic")
    radius = convexity_radius(p).for_policy(radius_policy)
    try:
        derivatives = f_p_derivatives(probe, s, p, norm)
    except (EigenvalueAtMinusOne, SingularTransport) as exc:
        raise OutOfDomain(str(exc)) from exc
    size = derivatives.w_norm_op if norm is not None and norm.is_normalized else derivatives.w_norm_p
    if size >= radius:
        raise OutOfDomain(f"‖w_s‖ = {size:.6f} leaves the ball of radius {radius:.6f}")
    f, f1, f2 = derivatives.f, derivatives.f_prime, derivatives.f_second
    return LogNormChainSlacks(
        lhs=(p - 1) * f1 * f1,
        mid=p * f * f2 / sinc(2 * size),
        rhs=p * (p - 1) * f * f2,
        f=f,
        f_prime=f1,
        f_second=f2,
    )


def _second_differences(values: np.ndarray) -> np.ndarray:
    return values[:-2] - 2 * values[1:-1] + values[2:]


def _classify(second: np.ndarray) -> Verdict:
    if second.size == 0:
        return Verdict.CONVEX
    if float(second.min()) < CONVEX_TOLERANCE:
        return Verdict.VIOLATED
    # at most one flat interior point is allowed along a strictly convex f_p
    if int(np.sum(second < STRICT_TOLERANCE)) <= 1:
        return Verdict.STRICTLY_CONVEX
    return Verdict.CONVEX


def _sample(probe: GeodesicProbe, grid: np.ndarray, norm: FinslerNorm) -> np.ndarray:
    values = np.empty(grid.size)
    for index, s in enumerate(grid):
        try:
            w, _ = log_curve(probe, float(s))
        except (EigenvalueAtMinusOne, SingularTransport) as exc:
            raise OutOfDomain(str(exc)) from exc
        values[index] = norm.of(w)
    return values


def convexity_probe(
    u: np.ndarray,
    probe: GeodesicProbe,
    norm: FinslerNorm,
    gridsize: int = 64,
    radius_policy: str = "conservative",
) -> ConvexityReport:
    """Sample s -> d(u, beta(s)) on a uniform grid and test its second differences."""
    if gridsize < 3:
        raise DomainError("gridsize must be at least 3")
    try:
        local = probe.translated(u)
    except EigenvalueAtMinusOne as exc:
        raise OutOfDomain(str(exc)) from exc
    grid = np.linspace(0.0, 1.0, gridsize)
    g_values = _sample(local, grid, norm)

    slacks: List[LogNormChainSlacks] = []
    if norm.kind is NormKind.OPERATOR:
        if float(g_values.max()) >= np.pi / 2:
            raise OutOfDomain(f"d(u, beta) reaches {g_values.max():.6f} >= pi/2")
    else:
        radius = convexity_radius(norm.p).for_policy(radius_policy) if norm.p >= 4 else BRANCH_MARGIN
        for s in grid:
            w, _ = log_curve(local, float(s))
            size = _ball_measure(w, norm.p, norm)
            if size >= radius:
                raise OutOfDomain(f"‖w_s‖ = {size:.6f} leaves the ball of radius {radius:.6f} at s = {s:.4f}")
        if norm.p >= 4 and not local.is_constant and not local.on_prolongation():
            slacks = [verify_log_norm_chain(local, float(s), norm.p, norm, radius_policy) for s in grid]

    second = _second_differences(g_values)
    verdict = _classify(second)
    if verdict is Verdict.VIOLATED:
        LOGGER.warning("Convexity violated along probe: min second difference %.3e", second.min())
    return ConvexityReport(
        grid=grid,
        g_values=g_values,
        second_differences=second,
        min_second_difference=float(second.min()) if second.size else 0.0,
        inequality_slacks=slacks,
        verdict=verdict,
    )


def probe_g2(probe: GeodesicProbe, gridsize: int = 64) -> ConvexityReport:
    """Frobenius-distance profile from 1; violations are reported, not raised."""
    grid = np.linspace(0.0, 1.0, gridsize)
    g_values = _sample(probe, grid, FinslerNorm.schatten(2))
    second = _second_differences(g_values)
    verdict = _classify(second)
    if verdict is Verdict.VIOLATED:
        LOGGER.info("g_2 non-convex along probe: min second difference %.3e", second.min())
    return ConvexityReport(grid, g_values, second, float(second.min()) if second.size else 0.0, [], verdict)


@dataclass(frozen=True)
class CompressionRow:
    rank: int
    s: float
    p: int
    norm_p: float
    norm_op: float
    error_to_full: float


@dataclass
class CompressionTable:
    rows: List[CompressionRow]
    dim: int
    normalized: bool = False

    def by_rank_and_s(self) -> dict:
        grouped: dict = {}
        for row in self.rows:
            grouped.setdefault((row.rank, row.s), []).append(row)
        return grouped

    def monotone_in_p(self, tol: float = 1e-12) -> bool:
        """Standard Schatten norms decrease in p, normalized ones increase."""
        for rows in self.by_rank_and_s().values():
            values = [row.norm_p for row in sorted(rows, key=lambda r: r.p)]
            steps = np.diff(values)
            if self.normalized and np.any(steps < -tol * max(1.0, max(values))):
                return False
            if not self.normalized and np.any(steps > tol * max(1.0, max(values))):
                return False
        return True

    def within_dimension_factor(self, tol: float = 1e-12) -> bool:
        for row in self.rows:
            low, high = row.norm_op, row.norm_op * self.dim ** (1.0 / row.p)
            if self.normalized:
                low, high = row.norm_op * self.dim ** (-1.0 / row.p), row.norm_op
            if not (low - tol <= row.norm_p <= high + tol):
                return False
        return True


def compression_limit_probe(
    probe: GeodesicProbe,
    ranks: Sequence[int],
    p_list: Sequence[int],
    s_values: Sequence[float] = (0.0, 0.5, 1.0),
    normalized: bool = False,
) -> CompressionTable:
    """Compress (v, z) by coordinate projections q_r and tabulate ‖w_{r,s}‖_p against ‖w_{r,s}‖."""
    dim = probe.dim
    full = {s: log_curve(probe, s)[0] for s in s_values}
    rows: List[CompressionRow] = []
    for rank in ranks:
        if not 1 <= rank <= dim:
            raise DomainError(f"rank {rank} outside 1..{dim}")
        q = np.diag((np.arange(dim) < rank).astype(float)).astype(np.complex128)
        compressed = GeodesicProbe(q @ probe.v @ q, q @ probe.z @ q)
        for s in s_values:
            w, _ = log_curve(compressed, s)
            w_op = operator_norm(w)
            error = operator_norm(w - full[s])
            for p in p_list:
                selector = FinslerNorm.normalized(p) if normalized else FinslerNorm.schatten(p)
                rows.append(CompressionRow(rank, float(s), int(p), schatten_norm(w, selector), w_op, error))
    return CompressionTable(rows, dim, normalized)


def path_length(points: Sequence[np.ndarray], norm: FinslerNorm) -> float:
    """Sum of ‖log(u_k* u_{k+1})‖ over consecutive samples."""
    total = 0.0
    for current, following in zip(points[:-1], points[1:]):
        total += norm.of(principal_log_unitary(adjoint(current) @ following))
    return total


def random_competitor_length(
    u1: np.ndarray, u2: np.ndarray, norm: FinslerNorm, scale: float, rng: np.random.Generator
) -> float:
    """Length of the two-segment geodesic path u1 -> m -> u2 through a perturbed midpoint."""
    dim = u1.shape[0]
    halfway = 0.5 * principal_log_unitary(adjoint(u1) @ u2)
    midpoint = u1 @ mat_exp(halfway) @ mat_exp(random_antihermitian(rng, dim, scale * rng.uniform(0.0, 1.0)))
    return rectifiable_distance(u1, midpoint, norm) + rectifiable_distance(midpoint, u2, norm)
