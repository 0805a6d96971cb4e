"""Geodesics between two orthogonal projections.

The pair (p0, p1) splits the space into the four intersections
H00 = ker p0 ∩ ker p1, H01 = ker p0 ∩ R(p1), H10 = R(p0) ∩ ker p1,
H11 = R(p0) ∩ R(p1) and a generic part on which p1 sits at angles
strictly between 0 and pi/2 from p0.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from unitary_finsler.errors import ComponentMismatch, NormOne, NotProjection
from unitary_finsler.linalg import adjoint, as_hermitian, principal_log_unitary
from unitary_finsler.norms import operator_norm

LOGGER = logging.getLogger(__name__)

CLUSTER_TOLERANCE = 1e-8
PROJECTION_TOLERANCE = 1e-10
CODIAGONAL_TOLERANCE = 1e-9
HALF_PI_WARNING = 1e-3


def _check_projection(p: np.ndarray, name: str) -> np.ndarray:
    try:
        p = as_hermitian(p)
    except ValueError as exc:
        raise NotProjection(f"{name} is not Hermitian") from exc
    if operator_norm(p @ p - p) > PROJECTION_TOLERANCE * max(1.0, operator_norm(p)):
        raise NotProjection(f"{name} is not idempotent")
    return p


def _eigenspace(m: np.ndarray, target: float) -> np.ndarray:
    values, vectors = scipy.linalg.eigh(m)
    return vectors[:, np.abs(values - target) <= CLUSTER_TOLERANCE]


@dataclass(frozen=True, eq=False)
class HalmosDecomposition:
    """Column frames of the five invariant subspaces and the generic angles.

    On the generic part, ``e[:, j]`` spans R(p0) and ``f[:, j]`` spans ker p0;
    in the basis (e_j, f_j), p1 = [[c², cs], [cs, s²]] with c = cos(angles[j]).
    """

    h00: np.ndarray
    h01: np.ndarray
    h10: np.ndarray
    h11: np.ndarray
    e: np.ndarray
    f: np.ndarray
    angles: np.ndarray

    @property
    def dim(self) -> int:
        return self.h00.shape[0]

    @property
    def generic_frame(self) -> np.ndarray:
        return np.hstack([self.e, self.f])

    @property
    def frames(self) -> list[np.ndarray]:
        return [self.h00, self.h01, self.h10, self.h11, self.generic_frame]

    @property
    def angle_operator(self) -> np.ndarray:
        return np.diag(self.angles)

    @property
    def near_half_pi(self) -> bool:
        return bool(np.any(np.pi / 2 - self.angles <= HALF_PI_WARNING))

    @property
    def index_matches(self) -> bool:
        return self.h01.shape[1] == self.h10.shape[1]


def halmos_decompose(p0: np.ndarray, p1: np.ndarray) -> HalmosDecomposition:
    p0 = _check_projection(p0, "p0")
    p1 = _check_projection(p1, "p1")
    total, difference = p0 + p1, p0 - p1
    h00 = _eigenspace(total, 0.0)
    h11 = _eigenspace(total, 2.0)
    h10 = _eigenspace(difference, 1.0)
    h01 = _eigenspace(difference, -1.0)

    corners = np.hstack([h00, h01, h10, h11])
    generic = scipy.linalg.null_space(adjoint(corners)) if corners.shape[1] else np.eye(p0.shape[0])
    if generic.shape[1]:
        values, vectors = scipy.linalg.eigh(adjoint(generic) @ p0 @ generic)
        e = generic @ vectors[:, values > 0.5]
        cos_sq, rotation = scipy.linalg.eigh(adjoint(e) @ p1 @ e)
        e = e @ rotation
    else:
        e, cos_sq = generic, np.zeros(0)
    cos_sq = np.clip(cos_sq, 0.0, 1.0)
    c, s = np.sqrt(cos_sq), np.sqrt(1.0 - cos_sq)
    f = (np.eye(p0.shape[0]) - p0) @ p1 @ e
    if f.shape[1]:
        f = f / (c * s)[None, :]
        f, _ = scipy.linalg.polar(f, side="right")
    angles = np.arccos(c)

    decomposition = HalmosDecomposition(h00, h01, h10, h11, e, f, angles)
    if decomposition.near_half_pi:
        LOGGER.warning("Generic angle within %.0e of pi/2; the corner splitting is ambiguous", HALF_PI_WARNING)
    LOGGER.debug(
        "Halmos dims H00=%d H01=%d H10=%d H11=%d generic=%d",
        h00.shape[1], h01.shape[1], h10.shape[1], h11.shape[1], 2 * e.shape[1],
    )
    return decomposition


def direct_rotation(p0: np.ndarray, p1: np.ndarray) -> np.ndarray:
    """z = ½ log(eps1 eps0) with eps_i = 2 p_i - 1, valid while ‖p0 - p1‖ < 1."""
    p0 = _check_projection(p0, "p0")
    p1 = _check_projection(p1, "p1")
    gap = operator_norm(p0 - p1)
    if gap >= 1.0 - 1e-10:
        raise NormOne(f"‖p0 - p1‖ = {gap:.12f}; use assemble_minimal_z")
    identity = np.eye(p0.shape[0])
    z = 0.5 * principal_log_unitary((2 * p1 - identity) @ (2 * p0 - identity))
    return (z - adjoint(z)) / 2


def assemble_minimal_z(p0: np.ndarray, p1: np.ndarray) -> np.ndarray:
    """p0 co-diagonal z with ‖z‖ <= pi/2 and e^z p0 e^{-z} = p1.

    Generic part: rotate e_j into f_j by its angle.  H10 is carried onto H01
    by a quarter turn along the frame-matching isometry.  H00 and H11 are fixed.
    """
    halmos = halmos_decompose(p0, p1)
    if not halmos.index_matches:
        raise ComponentMismatch(
            f"dim H01 = {halmos.h01.shape[1]} differs from dim H10 = {halmos.h10.shape[1]}"
        )
    e, f = halmos.e, halmos.f
    generic = f @ halmos.angle_operator @ adjoint(e)
    swap = halmos.h01 @ adjoint(halmos.h10)
    z = (generic - adjoint(generic)) + (np.pi / 2) * (swap - adjoint(swap))
    return z


def verify_codiagonal(p: np.ndarray, z: np.ndarray, tol: float = CODIAGONAL_TOLERANCE) -> bool:
    complement = np.eye(p.shape[0]) - p
    budget = tol * operator_norm(z)
    return operator_norm(p @ z @ p) <= budget and operator_norm(complement @ z @ complement) <= budget


def projection_distance(p0: np.ndarray, p1: np.ndarray) -> float:
    """Rectifiable distance between p0 and p1 in their orbit: ‖z‖ of the assembled generator."""
    return operator_norm(assemble_minimal_z(p0, p1))
