"""Unitary orbits of a finite-spectrum self-adjoint matrix.

Tangent vectors at b are x = zb - bz for anti-Hermitian z; the Finsler norm
of x is the smallest operator norm over all such liftings z.  Two liftings
differ by an anti-Hermitian element of the commutant of b, which is block
diagonal with respect to the spectral projections of b.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, List, NamedTuple, Optional, Protocol, Sequence

import numpy as np
import scipy.linalg
import scipy.optimize

from unitary_finsler.errors import (
    ClosedFormMismatch,
    DomainError,
    EigenvalueAtMinusOne,
    NormTooLarge,
    NotTangent,
    OutsideSection,
    SingleEigenvalue,
    SingularMatrix,
)
from unitary_finsler.linalg import adjoint, as_hermitian, mat_exp, polar_unitary_part, principal_log_unitary
from unitary_finsler.norms import operator_norm
from unitary_finsler.sampling import random_antihermitian, random_hermitian, trial_generator

LOGGER = logging.getLogger(__name__)

CLUSTER_TOLERANCE = 1e-8
RANGE_TOLERANCE = 1e-9
PROBE_STEPS = (1.0, -1.0, 0.5, -0.5, 0.1, -0.1)
BISECTION_LEVELS = 30
PROJECTION_SWEEPS = 40
SMOOTHING_STAGES = tuple(10.0**k for k in range(1, 11))
SMOOTHING_ITERATIONS = 150


class KernelSource(Protocol):
    """Anything that can sample the anti-Hermitian isotropy directions at its base point."""

    dim: int

    def kernel_direction(self, rng: np.random.Generator, scale: float) -> np.ndarray: ...


@dataclass
class SpectralDecomposition:
    """b = sum_i eigenvalues[i] * projections[i] with orthonormal column frames per block."""

    eigenvalues: np.ndarray
    frames: List[np.ndarray]

    @classmethod
    def from_matrix(cls, a: np.ndarray, tol: float = CLUSTER_TOLERANCE) -> "SpectralDecomposition":
        values, vectors = scipy.linalg.eigh(as_hermitian(a))
        scale = max(1.0, float(np.max(np.abs(values))))
        groups: List[List[int]] = [[0]]
        for index in range(1, values.size):
            if values[index] - values[groups[-1][-1]] > tol * scale:
                groups.append([index])
            else:
                groups[-1].append(index)
        eigenvalues = np.array([values[group].mean() for group in groups])
        return cls(eigenvalues, [vectors[:, group] for group in groups])

    @classmethod
    def from_parts(cls, eigenvalues: Sequence[float], projections: Sequence[np.ndarray]) -> "SpectralDecomposition":
        frames = []
        for projection in projections:
            values, vectors = scipy.linalg.eigh(as_hermitian(projection))
            frames.append(vectors[:, values > 0.5])
        decomposition = cls(np.asarray(eigenvalues, dtype=float), frames)
        total = sum(projections)
        if operator_norm(total - np.eye(total.shape[0])) > 1e-10:
            raise DomainError("spectral projections do not sum to the identity")
        if len(set(np.round(decomposition.eigenvalues, 12))) != len(decomposition.eigenvalues):
            raise DomainError("eigenvalues must be pairwise distinct")
        return decomposition

    @property
    def dim(self) -> int:
        return self.frames[0].shape[0]

    @property
    def n_blocks(self) -> int:
        return len(self.frames)

    @property
    def block_sizes(self) -> List[int]:
        return [frame.shape[1] for frame in self.frames]

    @property
    def projections(self) -> List[np.ndarray]:
        return [frame @ adjoint(frame) for frame in self.frames]

    @property
    def basis(self) -> np.ndarray:
        return np.hstack(self.frames)

    @property
    def slices(self) -> List[slice]:
        bounds = np.concatenate([[0], np.cumsum(self.block_sizes)])
        return [slice(int(start), int(stop)) for start, stop in zip(bounds[:-1], bounds[1:])]

    @property
    def distinguished_block(self) -> Optional[int]:
        """Index of the unique largest block (rank >= 2), standing in for ker A of a finite-rank A."""
        sizes = self.block_sizes
        largest = max(sizes)
        if largest < 2 or sizes.count(largest) > 1:
            return None
        return sizes.index(largest)

    def reconstruct(self) -> np.ndarray:
        return sum(value * projection for value, projection in zip(self.eigenvalues, self.projections))

    def kernel_direction(self, rng: np.random.Generator, scale: float) -> np.ndarray:
        """Anti-Hermitian element of the commutant, of operator norm ``scale``."""
        d = np.zeros((self.dim, self.dim), dtype=np.complex128)
        for frame in self.frames:
            d += frame @ random_antihermitian(rng, frame.shape[1]) @ adjoint(frame)
        size = operator_norm(d)
        return d * (scale / size) if size > 0 else d


def delta(b: np.ndarray, y: np.ndarray) -> np.ndarray:
    """delta_b(y) = yb - by."""
    if b.shape != y.shape:
        raise DomainError("delta needs equal dimensions")
    return y @ b - b @ y


def kernel_projection(spectral: SpectralDecomposition, x: np.ndarray) -> np.ndarray:
    """P(x) = sum_i p_i x p_i, the conditional expectation onto the commutant."""
    return sum(p @ x @ p for p in spectral.projections)


def range_membership(spectral: SpectralDecomposition, w: np.ndarray) -> bool:
    size = operator_norm(w)
    if size == 0.0:
        return True
    return max(operator_norm(p @ w @ p) for p in spectral.projections) <= RANGE_TOLERANCE * size


def derivation_matrix(b: np.ndarray) -> np.ndarray:
    """delta_b acting on column-major vec(y)."""
    identity = np.eye(b.shape[0])
    return np.kron(b.T, identity) - np.kron(identity, b)


def derivation_gap(spectral: SpectralDecomposition) -> float:
    """C = min_{i != j} |lambda_i - lambda_j|."""
    if spectral.n_blocks < 2:
        raise SingleEigenvalue("delta_A vanishes identically")
    return float(np.min(np.diff(np.sort(spectral.eigenvalues))))


def measured_derivation_gap(spectral: SpectralDecomposition) -> float:
    """Smallest nonzero singular value of delta_A as a linear map (Frobenius norm constant)."""
    if spectral.n_blocks < 2:
        raise SingleEigenvalue("delta_A vanishes identically")
    sigma = scipy.linalg.svdvals(derivation_matrix(spectral.reconstruct()))
    return float(np.min(sigma[sigma > 1e-9 * sigma[0]]))


@dataclass(frozen=True)
class DerivationGap:
    eigen_gap: float
    measured_gap: float
    operator_ratio: float


def derivation_gap_report(spectral: SpectralDecomposition, rng: np.random.Generator, samples: int = 200) -> DerivationGap:
    """Both constants plus the smallest sampled ‖delta_A(x)‖ / ‖x - P_A(x)‖ in operator norm."""
    a = spectral.reconstruct()
    ratios = []
    for _ in range(samples):
        x = random_hermitian(rng, spectral.dim) + 1j * random_hermitian(rng, spectral.dim)
        off = x - kernel_projection(spectral, x)
        ratios.append(operator_norm(delta(a, x)) / operator_norm(off))
    return DerivationGap(derivation_gap(spectral), measured_derivation_gap(spectral), float(min(ratios)))


def cross_section_theta(spectral: SpectralDecomposition, u: np.ndarray) -> np.ndarray:
    """theta(b) = u Omega(P_A(u*)) for b = u A u*; depends on b only."""
    a = spectral.reconstruct()
    b = u @ a @ adjoint(u)
    gap = derivation_gap(spectral)
    if operator_norm(b - a) >= gap:
        raise OutsideSection(f"‖uAu* - A‖ = {operator_norm(b - a):.6f} is not below C = {gap:.6f}")
    try:
        return u @ polar_unitary_part(kernel_projection(spectral, adjoint(u)))
    except SingularMatrix as exc:
        raise OutsideSection(str(exc)) from exc


class Completion(NamedTuple):
    z: np.ndarray
    mu: float


def _central_completion(values: np.ndarray, vectors: np.ndarray, y: np.ndarray, level_sq: float) -> np.ndarray:
    gap = level_sq - values**2
    gamma = (adjoint(vectors) @ y) / np.sqrt(gap)[:, None]
    z = -adjoint(gamma) @ (values[:, None] * gamma)
    return (z + adjoint(z)) / 2


def dkw_complete(x: np.ndarray, y: np.ndarray) -> Completion:
    """Hermitian Z minimizing ‖[[X, Y], [Y*, Z]]‖; the minimum is mu = ‖[X Y]‖.

    Z = -Y* X (mu² - X²)^{-1} Y.  When mu² - X² is singular the level is
    lifted to mu²(1 + eps) and eps refined downwards, keeping the best completion.
    """
    x = as_hermitian(x)
    y = np.asarray(y, dtype=np.complex128)
    if y.shape[0] != x.shape[0]:
        raise DomainError(f"block shapes {x.shape} and {y.shape} do not fit")
    size = y.shape[1]
    mu = operator_norm(np.hstack([x, y]))
    if mu == 0.0:
        return Completion(np.zeros((size, size), dtype=np.complex128), 0.0)
    values, vectors = scipy.linalg.eigh(x)
    if float(np.min(mu**2 - values**2)) > 1e-10 * mu**2:
        return Completion(_central_completion(values, vectors, y, mu**2), mu)

    LOGGER.debug("DKW level singular; refining the regularized level")
    best, best_norm = None, np.inf
    for eps in (1e-10, 1e-12, 1e-14):
        z = _central_completion(values, vectors, y, mu**2 * (1 + eps))
        completed = operator_norm(np.block([[x, y], [adjoint(y), z]]))
        if completed < best_norm:
            best, best_norm = z, completed
    return Completion(best, mu)


def canonical_lifting(spectral: SpectralDecomposition, x: np.ndarray) -> np.ndarray:
    """The lifting of x with vanishing diagonal blocks: z_jk = x_jk / (lambda_k - lambda_j)."""
    basis = spectral.basis
    lam = np.repeat(spectral.eigenvalues, spectral.block_sizes)
    spread = lam[None, :] - lam[:, None]
    rotated = adjoint(basis) @ x @ basis
    same = np.abs(spread) < 0.5 * derivation_gap(spectral) if spectral.n_blocks > 1 else np.ones_like(spread, dtype=bool)
    z = np.where(same, 0.0, rotated / np.where(same, 1.0, spread))
    z = basis @ z @ adjoint(basis)
    return (z - adjoint(z)) / 2


@dataclass
class OrbitTangent:
    base: np.ndarray
    vector: np.ndarray
    lifting: np.ndarray

    @classmethod
    def from_lifting(cls, base: np.ndarray, lifting: np.ndarray) -> "OrbitTangent":
        return cls(base, delta(base, lifting), lifting)

    @classmethod
    def from_vector(cls, spectral: SpectralDecomposition, vector: np.ndarray) -> "OrbitTangent":
        if not range_membership(spectral, vector):
            raise NotTangent("vector has a nonzero block-diagonal part")
        return cls(spectral.reconstruct(), vector, canonical_lifting(spectral, vector))

    def is_consistent(self, tol: float = 1e-10) -> bool:
        scale = max(1.0, operator_norm(self.vector))
        return operator_norm(delta(self.base, self.lifting) - self.vector) <= tol * scale


@dataclass(frozen=True)
class CertificateEntry:
    direction_norm: float
    norm_slack: float
    log_slack: float


@dataclass
class MinimalLifting:
    z_c: np.ndarray
    quotient_norm: float
    certificate: List[CertificateEntry] = field(default_factory=list)
    unique: bool = True

    @property
    def min_norm_slack(self) -> float:
        return min((entry.norm_slack for entry in self.certificate), default=0.0)

    @property
    def min_log_slack(self) -> float:
        return min((entry.log_slack for entry in self.certificate), default=0.0)

    def certified(self, norm_tol: float = 1e-8, log_tol: float = 1e-7) -> bool:
        return self.min_norm_slack >= -norm_tol and self.min_log_slack >= -log_tol


class _BlockProblem:
    """min ‖h0 + blockdiag(H_i)‖ over Hermitian H_i on the free blocks, in the eigenbasis of b."""

    def __init__(self, fixed: np.ndarray, slices: Sequence[slice], free: Sequence[int]):
        self.fixed = fixed.copy()
        self.slices = [slices[i] for i in free]
        for block in self.slices:
            self.fixed[block, block] = 0.0
        self.sizes = [block.stop - block.start for block in self.slices]

    def lower_bound(self, all_slices: Sequence[slice]) -> float:
        return max(operator_norm(self.fixed[block, :]) for block in all_slices)

    def scaled(self, factor: float) -> "_BlockProblem":
        clone = _BlockProblem.__new__(_BlockProblem)
        clone.fixed, clone.slices, clone.sizes = self.fixed * factor, self.slices, self.sizes
        return clone

    def free_part(self, h: np.ndarray) -> np.ndarray:
        result = np.zeros_like(h)
        for block in self.slices:
            result[block, block] = h[block, block]
        return result

    def restore(self, h: np.ndarray) -> np.ndarray:
        return self.fixed + self.free_part(h)

    def pack(self, h: np.ndarray) -> np.ndarray:
        parts = []
        for block in self.slices:
            piece = h[block, block]
            parts.append((piece.real + piece.imag).ravel())
        return np.concatenate(parts)

    def unpack(self, params: np.ndarray) -> np.ndarray:
        h = self.fixed.copy()
        offset = 0
        for block, size in zip(self.slices, self.sizes):
            raw = params[offset : offset + size * size].reshape(size, size)
            offset += size * size
            h[block, block] = (raw + raw.T) / 2 + 1j * (raw - raw.T) / 2
        return h

    def unpack_gradient(self, gradient: np.ndarray) -> np.ndarray:
        parts = []
        for block in self.slices:
            piece = gradient[block, block]
            parts.append((piece.real + piece.imag).ravel())
        return np.concatenate(parts)


def _alternating_projections(problem: _BlockProblem, start: np.ndarray, level: float) -> tuple[np.ndarray, bool]:
    h = start
    best, best_norm = start, operator_norm(start)
    for _ in range(PROJECTION_SWEEPS):
        values, vectors = scipy.linalg.eigh(h)
        top = float(np.max(np.abs(values)))
        if top < best_norm:
            best, best_norm = h, top
        if top <= level:
            return h, True
        clipped = (vectors * np.clip(values, -level, level)) @ adjoint(vectors)
        h = problem.restore(clipped)
    return best, False


def _bisect_level(problem: _BlockProblem, start: np.ndarray, lower: float) -> np.ndarray:
    best, high = start, operator_norm(start)
    low = lower
    for _ in range(BISECTION_LEVELS):
        if high - low <= 1e-12 * max(1.0, high):
            break
        level = 0.5 * (low + high)
        candidate, feasible = _alternating_projections(problem, best, level)
        candidate_norm = operator_norm(candidate)
        if candidate_norm < high:
            best, high = candidate, candidate_norm
        if not feasible:
            low = level
    LOGGER.debug("Bisection bracket [%.12f, %.12f]", low, high)
    return best


def _smoothed_objective(problem: _BlockProblem, beta: float) -> Callable[[np.ndarray], tuple[float, np.ndarray]]:
    def objective(params: np.ndarray) -> tuple[float, np.ndarray]:
        values, vectors = scipy.linalg.eigh(problem.unpack(params))
        top = float(np.max(np.abs(values)))
        plus = np.exp(beta * (values - top))
        minus = np.exp(beta * (-values - top))
        total = float(np.sum(plus + minus))
        gradient = (vectors * ((plus - minus) / total)) @ adjoint(vectors)
        return top + np.log(total) / beta, problem.unpack_gradient(gradient)

    return objective


def _smooth_refine(problem: _BlockProblem, start: np.ndarray, lower: float) -> np.ndarray:
    """Log-sum-exp continuation; only accepts points with a smaller operator norm."""
    best, best_norm = start, operator_norm(start)
    params = problem.pack(start)
    for beta in SMOOTHING_STAGES:
        if best_norm - lower <= 1e-13 * max(1.0, best_norm):
            break
        result = scipy.optimize.minimize(
            _smoothed_objective(problem, beta),
            params,
            jac=True,
            method="L-BFGS-B",
            options={"maxiter": SMOOTHING_ITERATIONS, "ftol": 1e-16, "gtol": 1e-13},
        )
        params = result.x
        candidate = problem.unpack(params)
        candidate_norm = operator_norm(candidate)
        if candidate_norm < best_norm:
            best, best_norm = candidate, candidate_norm
    return best


def _solve_blocks(
    problem: _BlockProblem, all_slices: Sequence[slice], restarts: int, rng: np.random.Generator
) -> tuple[np.ndarray, bool]:
    if not problem.slices:
        return problem.fixed, True
    scale = max(operator_norm(problem.fixed), 1e-300)
    fixed = problem.fixed / scale
    normalized = problem.scaled(1.0 / scale)
    lower = normalized.lower_bound(all_slices)

    results = []
    for attempt in range(max(1, restarts)):
        start = fixed.copy()
        if attempt:
            noise = random_hermitian(rng, fixed.shape[0], scale=rng.uniform(0.1, 1.0))
            start = fixed + normalized.free_part(noise)
        candidate = _bisect_level(normalized, start, lower)
        candidate = _smooth_refine(normalized, candidate, lower)
        results.append((operator_norm(candidate), candidate))
        LOGGER.debug("Restart %d reached %.12f (lower bound %.12f)", attempt, results[-1][0], lower)

    results.sort(key=lambda item: item[0])
    best_norm, best = results[0]
    unique = all(
        operator_norm(candidate - best) <= 1e-6 for norm, candidate in results[1:] if norm - best_norm <= 1e-6
    )
    if not unique:
        LOGGER.warning("Minimal liftings differ between restarts at equal norm %.9f", best_norm * scale)
    return best * scale, unique


def _check_tangent(spectral: SpectralDecomposition, tangent: OrbitTangent) -> None:
    scale = max(1.0, operator_norm(tangent.base))
    if operator_norm(spectral.reconstruct() - tangent.base) > 1e-8 * scale:
        raise DomainError("spectral decomposition does not belong to the tangent's base point")
    if not range_membership(spectral, tangent.vector):
        raise NotTangent("vector is not in the range of delta_b")


def _minimize(
    spectral: SpectralDecomposition,
    tangent: OrbitTangent,
    free_blocks: Optional[Sequence[int]],
    restarts: int,
    rng: Optional[np.random.Generator],
) -> tuple[np.ndarray, bool]:
    _check_tangent(spectral, tangent)
    if operator_norm(tangent.vector) == 0.0 or spectral.n_blocks == 1:
        return np.zeros_like(tangent.vector, dtype=np.complex128), True
    lifting = tangent.lifting if tangent.is_consistent() else canonical_lifting(spectral, tangent.vector)
    basis = spectral.basis
    rotated = -1j * (adjoint(basis) @ lifting @ basis)
    rotated = (rotated + adjoint(rotated)) / 2
    free = list(range(spectral.n_blocks)) if free_blocks is None else list(free_blocks)
    problem = _BlockProblem(rotated, spectral.slices, free)

    if spectral.n_blocks == 2 and len(free) == 2:
        # co-diagonal liftings are minimal: the off-diagonal block norm is a lower bound
        h, unique = problem.fixed, True
    else:
        h, unique = _solve_blocks(problem, spectral.slices, restarts, rng or trial_generator(0, 0))
    z = basis @ (1j * h) @ adjoint(basis)
    return (z - adjoint(z)) / 2, unique


def quotient_norm(
    spectral: SpectralDecomposition,
    tangent: OrbitTangent,
    free_blocks: Optional[Sequence[int]] = None,
    restarts: int = 8,
    rng: Optional[np.random.Generator] = None,
) -> float:
    """‖x‖_b = inf ‖z + d‖ over anti-Hermitian d commuting with b.

    ``free_blocks`` restricts d to the listed diagonal blocks; the others keep
    the values of the given lifting.
    """
    z, _ = _minimize(spectral, tangent, free_blocks, restarts, rng)
    return operator_norm(z)


def complete_block(spectral: SpectralDecomposition, z: np.ndarray, block: int) -> np.ndarray:
    """Replace the diagonal block ``block`` of the anti-Hermitian z by its DKW completion."""
    basis = spectral.basis
    h = -1j * (adjoint(basis) @ z @ basis)
    h = (h + adjoint(h)) / 2
    target = spectral.slices[block]
    rest = np.setdiff1d(np.arange(spectral.dim), np.arange(target.start, target.stop))
    completion = dkw_complete(h[np.ix_(rest, rest)], h[rest, target])
    h[target, target] = completion.z
    result = basis @ (1j * h) @ adjoint(basis)
    return (result - adjoint(result)) / 2


def minimality_probe(
    spectral: KernelSource,
    lifting: MinimalLifting,
    trials: int,
    rng: np.random.Generator,
    directions: Sequence[np.ndarray] = (),
    log_grid: int = 21,
) -> List[CertificateEntry]:
    """Sample kernel directions d and compare ‖z_c + td‖ and ‖log(e^{z_c} e^{td})‖ with t = 0."""
    z_c = lifting.z_c
    base_norm = operator_norm(z_c)
    if base_norm >= np.pi / 2:
        raise NormTooLarge(f"‖z_c‖ = {base_norm:.6f} is not below pi/2")
    room = 0.9 * (np.pi / 2 - base_norm)
    candidates = [np.asarray(d) for d in directions]
    candidates += [spectral.kernel_direction(rng, room * rng.uniform(0.1, 1.0)) for _ in range(trials)]
    grid = np.linspace(-1.0, 1.0, log_grid)
    start = mat_exp(z_c)
    entries = []
    for d in candidates:
        size = operator_norm(d)
        if size > room:
            d = d * (room / size)
            size = room
        norm_slack = min(operator_norm(z_c + t * d) - base_norm for t in PROBE_STEPS) if size else 0.0
        log_slack = 0.0
        if size:
            log_slack = min(operator_norm(principal_log_unitary(start @ mat_exp(t * d))) for t in grid) - base_norm
        entries.append(CertificateEntry(size, float(norm_slack), float(log_slack)))
    return entries


def minimal_lifting(
    spectral: SpectralDecomposition,
    tangent: OrbitTangent,
    restarts: int = 8,
    rng: Optional[np.random.Generator] = None,
    certify: int = 0,
) -> MinimalLifting:
    """A lifting realizing the quotient norm.

    With a distinguished block p0 the general minimizer z0 is stripped of
    p0 z0 p0 and that block is completed back with the DKW formula.
    """
    rng = rng or trial_generator(0, 0)
    z0, unique = _minimize(spectral, tangent, None, restarts, rng)
    block = spectral.distinguished_block
    if block is not None and spectral.n_blocks > 1 and operator_norm(z0) > 0:
        completed = complete_block(spectral, z0, block)
        if operator_norm(completed) <= operator_norm(z0):
            z0 = completed
    result = MinimalLifting(z0, operator_norm(z0), unique=unique)
    if certify and result.quotient_norm < np.pi / 2:
        result.certificate = minimality_probe(spectral, result, certify, rng)
    return result


def orbit_competitor_length(
    spectral: KernelSource, z_c: np.ndarray, rng: np.random.Generator, fiber_scale: float = 0.5, mid_scale: float = 0.5
) -> float:
    """Operator-norm length of a two-segment path from 1 to the fiber of e^{z_c} b e^{-z_c}."""
    for _ in range(20):
        end = mat_exp(z_c) @ mat_exp(spectral.kernel_direction(rng, fiber_scale * rng.uniform(0.0, 1.0)))
        try:
            halfway = mat_exp(0.5 * principal_log_unitary(end))
            midpoint = halfway @ mat_exp(random_antihermitian(rng, spectral.dim, mid_scale * rng.uniform(0.0, 1.0)))
            first = operator_norm(principal_log_unitary(midpoint))
            second = operator_norm(principal_log_unitary(adjoint(midpoint) @ end))
        except EigenvalueAtMinusOne:
            continue
        return first + second
    raise EigenvalueAtMinusOne("could not draw a competitor inside the log branch")


@dataclass
class OrbitPath:
    """A smooth curve in an orbit with its velocity."""

    point: Callable[[float], np.ndarray]
    velocity: Callable[[float], np.ndarray]


@dataclass
class PiecewiseLift:
    liftings: List[np.ndarray]
    unitary: np.ndarray
    length: float
    endpoint_error: float


def piecewise_lift(
    path: OrbitPath, n_segments: int, restarts: int = 2, rng: Optional[np.random.Generator] = None
) -> PiecewiseLift:
    """Omega(1) = e^{dt z_{n-1}} ... e^{dt z_0} from minimal liftings at the grid points."""
    if n_segments < 1:
        raise DomainError("n_segments must be positive")
    step = 1.0 / n_segments
    start = path.point(0.0)
    omega = np.eye(start.shape[0], dtype=np.complex128)
    liftings = []
    length = 0.0
    for index in range(n_segments):
        t = index * step
        spectral = SpectralDecomposition.from_matrix(path.point(t))
        velocity = path.velocity(t)
        tangent = OrbitTangent.from_vector(spectral, velocity)
        lifting = minimal_lifting(spectral, tangent, restarts=restarts, rng=rng)
        liftings.append(lifting.z_c)
        length += lifting.quotient_norm * step
        omega = mat_exp(step * lifting.z_c) @ omega
    error = operator_norm(omega @ start @ adjoint(omega) - path.point(1.0))
    return PiecewiseLift(liftings, omega, length, error)


def commutator_decay(lambdas: Sequence[float], k: int) -> tuple[float, float]:
    """(‖x_k A0 - A0 x_k‖₂², (2/k) sum lambda_i²) with x_k the averaging projection on the first k coordinates."""
    values = np.asarray(lambdas, dtype=float)
    if not 1 <= k <= values.size:
        raise DomainError(f"k = {k} outside 1..{values.size}")
    x_k = np.zeros((values.size, values.size))
    x_k[:k, :k] = 1.0 / k
    a0 = np.diag(values)
    value = float(np.linalg.norm(x_k @ a0 - a0 @ x_k, "fro") ** 2)
    head = values[:k]
    closed_form = 2.0 / k**2 * (k * np.sum(head**2) - np.sum(head) ** 2)
    if abs(value - closed_form) > 1e-12 * max(1.0, value):
        raise ClosedFormMismatch(f"closed form {closed_form!r} disagrees with direct value {value!r}")
    return value, float(2.0 / k * np.sum(head**2))
