"""Dense complex matrix kernel.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  The
``as_hermitian``/``as_antihermitian``/``as_unitary`` constructors play the
role of typed matrices: they validate against the symmetry tolerance and
return a re-symmetrized copy.
"""
from __future__ import annotations

import logging
from typing import Callable

import numpy as np
import scipy.linalg

from unitary_finsler.errors import (
    EigenvalueAtMinusOne,
    FunctionalCalculusError,
    NonFiniteMatrix,
    NotUnitary,
    SingularMatrix,
    SingularTransport,
    SymmetryViolation,
)

LOGGER = logging.getLogger(__name__)

SYMMETRY_TOLERANCE = 1e-12
UNITARY_TOLERANCE = 1e-10
MINUS_ONE_TOLERANCE = 1e-10
SERIES_THRESHOLD = 1e-6
TRANSPORT_FLOOR = 1e-12


def adjoint(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Return ab - ba."""
    return a @ b - b @ a


def _as_square(m) -> np.ndarray:
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteMatrix("matrix has non-finite entries")
    return arr


def _symmetry_budget(arr: np.ndarray) -> float:
    scale = max(1.0, float(np.linalg.norm(arr, 2)))
    return SYMMETRY_TOLERANCE * arr.shape[0] * scale


def as_hermitian(m) -> np.ndarray:
    arr = _as_square(m)
    defect = float(np.linalg.norm(arr - adjoint(arr), 2))
    if defect > _symmetry_budget(arr):
        raise SymmetryViolation(f"matrix is not Hermitian (‖M - M*‖ = {defect:.3e})")
    return (arr + adjoint(arr)) / 2


def as_antihermitian(m) -> np.ndarray:
    arr = _as_square(m)
    defect = float(np.linalg.norm(arr + adjoint(arr), 2))
    if defect > _symmetry_budget(arr):
        raise SymmetryViolation(f"matrix is not anti-Hermitian (‖M + M*‖ = {defect:.3e})")
    return (arr - adjoint(arr)) / 2


def as_unitary(m) -> np.ndarray:
    arr = _as_square(m)
    dim = arr.shape[0]
    defect = float(np.linalg.norm(adjoint(arr) @ arr - np.eye(dim), 2))
    if defect > UNITARY_TOLERANCE * dim:
        raise NotUnitary(f"matrix is not unitary (‖u*u - 1‖ = {defect:.3e})")
    return arr


def is_antihermitian(m: np.ndarray) -> bool:
    arr = np.asarray(m)
    return float(np.linalg.norm(arr + adjoint(arr), 2)) <= _symmetry_budget(arr)


def _is_normal(arr: np.ndarray) -> bool:
    scale = max(1.0, float(np.linalg.norm(arr, 2)) ** 2)
    gap = float(np.linalg.norm(arr @ adjoint(arr) - adjoint(arr) @ arr, 2))
    return gap <= SYMMETRY_TOLERANCE * arr.shape[0] * scale


def antihermitian_eigh(w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return (theta, V) with w = V diag(i theta) V*."""
    theta, vectors = scipy.linalg.eigh(-1j * w)
    return theta, vectors


def mat_exp(x) -> np.ndarray:
    arr = _as_square(x)
    if is_antihermitian(arr):
        theta, vectors = antihermitian_eigh((arr - adjoint(arr)) / 2)
        return (vectors * np.exp(1j * theta)) @ adjoint(vectors)
    if _is_normal(arr):
        triangular, basis = scipy.linalg.schur(arr, output="complex")
        return (basis * np.exp(np.diag(triangular))) @ adjoint(basis)
    return scipy.linalg.expm(arr)


def principal_log_unitary(u) -> np.ndarray:
    """Anti-Hermitian logarithm of ``u`` with eigen-angles in (-pi, pi)."""
    arr = as_unitary(u)
    triangular, basis = scipy.linalg.schur(arr, output="complex")
    eigenvalues = np.diag(triangular)
    distance = float(np.min(np.abs(eigenvalues + 1.0)))
    if distance < MINUS_ONE_TOLERANCE:
        raise EigenvalueAtMinusOne(f"spectrum is {distance:.3e} away from -1")
    angles = np.angle(eigenvalues)
    log = (basis * (1j * angles)) @ adjoint(basis)
    return (log - adjoint(log)) / 2


def transport_weights(theta: np.ndarray) -> np.ndarray:
    """phi(theta_j - theta_k) with phi(d) = (1 - e^{-id}) / (id)."""
    spread = theta[:, None] - theta[None, :]
    x = 1j * spread
    weights = np.ones_like(x)
    small = np.abs(spread) < SERIES_THRESHOLD
    large = ~small
    weights[large] = -np.expm1(-x[large]) / x[large]
    xs = x[small]
    weights[small] = 1 - xs / 2 + xs**2 / 6 - xs**3 / 24
    return weights


def dexp_transport(w, wdot) -> np.ndarray:
    """Closed form of the integral of e^{-tw} wdot e^{tw} over t in [0, 1]."""
    w = as_antihermitian(w)
    wdot = as_antihermitian(wdot)
    theta, vectors = antihermitian_eigh(w)
    rotated = adjoint(vectors) @ wdot @ vectors
    result = vectors @ (rotated * transport_weights(theta)) @ adjoint(vectors)
    return (result - adjoint(result)) / 2


def dexp_inverse(w, z) -> np.ndarray:
    """Solve dexp_transport(w, wdot) = z for wdot."""
    w = as_antihermitian(w)
    z = as_antihermitian(z)
    theta, vectors = antihermitian_eigh(w)
    weights = transport_weights(theta)
    smallest = float(np.min(np.abs(weights)))
    if smallest < TRANSPORT_FLOOR:
        raise SingularTransport(f"transport weight {smallest:.3e} vanishes; spectral spread reaches 2*pi")
    rotated = adjoint(vectors) @ z @ vectors
    result = vectors @ (rotated / weights) @ adjoint(vectors)
    return (result - adjoint(result)) / 2


def polar_unitary_part(g, floor: float = 1e-12) -> np.ndarray:
    """Omega(g) = g (g*g)^{-1/2}; ``floor`` bounds the relative smallest singular value."""
    arr = _as_square(g)
    singular_values = scipy.linalg.svdvals(arr)
    if singular_values[-1] <= floor * max(singular_values[0], np.finfo(float).tiny):
        raise SingularMatrix(f"smallest singular value {singular_values[-1]:.3e} is numerically zero")
    unitary, _ = scipy.linalg.polar(arr, side="right")
    return unitary


def functional_calculus(a, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Apply ``f`` to the eigenvalues of the Hermitian matrix ``a``."""
    arr = as_hermitian(a)
    eigenvalues, vectors = scipy.linalg.eigh(arr)
    with np.errstate(all="ignore"):
        values = np.asarray(f(eigenvalues))
    if values.shape != eigenvalues.shape or not np.all(np.isfinite(values)):
        raise FunctionalCalculusError("function is undefined at an eigenvalue")
    result = (vectors * values) @ adjoint(vectors)
    if np.isrealobj(values) or np.allclose(np.imag(values), 0.0):
        return (result + adjoint(result)) / 2
    return result
