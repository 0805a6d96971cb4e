"""The unitary orbit of the order-two nilpotent N = [[0, 1], [0, 0]]."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg

from unitary_finsler.errors import DomainError, NotInSection, NotOrbitShape, SingularMatrix, SymmetryViolation
from unitary_finsler.linalg import adjoint, as_antihermitian, is_antihermitian, polar_unitary_part
from unitary_finsler.norms import operator_norm
from unitary_finsler.orbits import MinimalLifting
from unitary_finsler.sampling import random_antihermitian

LOGGER = logging.getLogger(__name__)

PATTERN_TOLERANCE = 1e-9
SHAPE_TOLERANCE = 1e-9
SECTION_FLOOR = 1e-10


@dataclass(frozen=True, eq=False)
class NilpotentContext:
    n: int
    nilpotent: np.ndarray

    @property
    def dim(self) -> int:
        return 2 * self.n

    def blocks(self, w: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        w = np.asarray(w, dtype=np.complex128)
        if w.shape != (self.dim, self.dim):
            raise DomainError(f"expected a {self.dim}x{self.dim} matrix, got {w.shape}")
        n = self.n
        return w[:n, :n], w[:n, n:], w[n:, :n], w[n:, n:]

    def kernel_direction(self, rng: np.random.Generator, scale: float) -> np.ndarray:
        """diag(y0, y0) with y0 anti-Hermitian, of operator norm ``scale``."""
        y0 = random_antihermitian(rng, self.n, scale)
        return scipy.linalg.block_diag(y0, y0)


def build_context(n: int) -> NilpotentContext:
    if n < 1:
        raise DomainError("half dimension must be at least 1")
    nilpotent = np.zeros((2 * n, 2 * n), dtype=np.complex128)
    nilpotent[:n, n:] = np.eye(n)
    return NilpotentContext(n, nilpotent)


def delta_N(ctx: NilpotentContext, z: np.ndarray) -> np.ndarray:
    """zN - Nz = [[-z21, z11 - z22], [0, z21]]."""
    return z @ ctx.nilpotent - ctx.nilpotent @ z


def _small(m: np.ndarray, scale: float) -> bool:
    return operator_norm(m) <= PATTERN_TOLERANCE * max(1.0, scale)


def kernel_membership(ctx: NilpotentContext, y: np.ndarray) -> bool:
    y11, y12, y21, y22 = ctx.blocks(y)
    scale = operator_norm(y)
    return is_antihermitian(y) and _small(y12, scale) and _small(y21, scale) and _small(y11 - y22, scale)


def range_membership_N(ctx: NilpotentContext, w: np.ndarray) -> bool:
    """w = [[a, b], [0, -a]] with b anti-Hermitian."""
    w11, w12, w21, w22 = ctx.blocks(w)
    scale = operator_norm(w)
    return _small(w21, scale) and _small(w11 + w22, scale) and _small(w12 + adjoint(w12), scale)


def supplement_membership(ctx: NilpotentContext, w: np.ndarray) -> bool:
    """w = [[a', b'], [c', a']] with b' Hermitian."""
    w11, w12, _, w22 = ctx.blocks(w)
    scale = operator_norm(w)
    return _small(w11 - w22, scale) and _small(w12 - adjoint(w12), scale)


class RangeSupplementSplit(NamedTuple):
    range_part: np.ndarray
    supplement_part: np.ndarray


def split_range_supplement(ctx: NilpotentContext, w: np.ndarray) -> RangeSupplementSplit:
    w11, w12, w21, w22 = ctx.blocks(w)
    a = (w11 - w22) / 2
    b = (w12 - adjoint(w12)) / 2
    zero = np.zeros_like(a)
    range_part = np.block([[a, b], [zero, -a]])
    a_prime = (w11 + w22) / 2
    supplement = np.block([[a_prime, (w12 + adjoint(w12)) / 2], [w21, a_prime]])
    return RangeSupplementSplit(range_part, supplement)


def check_orbit_shape(ctx: NilpotentContext, b: np.ndarray) -> np.ndarray:
    b = np.asarray(b, dtype=np.complex128)
    ctx.blocks(b)
    scale = max(1.0, operator_norm(b))
    if operator_norm(b @ b) > SHAPE_TOLERANCE * scale:
        raise NotOrbitShape("b² is not zero")
    if operator_norm(b @ adjoint(b) @ b - b) > SHAPE_TOLERANCE * scale:
        raise NotOrbitShape("bb*b differs from b")
    return b


def nilpotent_cross_section(ctx: NilpotentContext, b: np.ndarray) -> np.ndarray:
    """mu(b), the unitary part of s(b) = bb*NN* + b*N; mu(b) N mu(b)* = b."""
    b = check_orbit_shape(ctx, b)
    n_ = ctx.nilpotent
    s = b @ adjoint(b) @ n_ @ adjoint(n_) + adjoint(b) @ n_
    try:
        return polar_unitary_part(s, floor=SECTION_FLOOR)
    except SingularMatrix as exc:
        raise NotInSection(f"s(b) is not invertible: {exc}") from exc


def antisymmetric_minimal_lifting(
    ctx: NilpotentContext, z11: np.ndarray, z12: np.ndarray, z22: np.ndarray
) -> np.ndarray:
    """z0 = [[D, z12], [z12, -D]], D = (z11 - z22)/2, for anti-Hermitian z12.

    The swap J = [[0, -1], [1, 0]] gives J* z0 J = -z0, so the spectrum of
    -i z0 is symmetric about 0 and no kernel element diag(y, y) lowers the norm.
    """
    z12 = np.asarray(z12, dtype=np.complex128)
    if not is_antihermitian(z12):
        raise SymmetryViolation("z12 must be anti-Hermitian")
    z11, z22 = as_antihermitian(z11), as_antihermitian(z22)
    if not z11.shape == z12.shape == z22.shape == (ctx.n, ctx.n):
        raise DomainError("blocks must all be n x n")
    half = (z11 - z22) / 2
    return np.block([[half, z12], [z12, -half]])


@dataclass(frozen=True, eq=False)
class AntiSymTangent:
    """Tangent vector [[x0, x1], [0, -x0]] at N with x0 and x1 anti-Hermitian."""

    x0: np.ndarray
    x1: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "x0", as_antihermitian(self.x0))
        object.__setattr__(self, "x1", as_antihermitian(self.x1))

    @classmethod
    def from_lifting(cls, ctx: NilpotentContext, z: np.ndarray) -> "AntiSymTangent":
        z11, _, z21, z22 = ctx.blocks(z)
        return cls(-z21, z11 - z22)

    @property
    def vector(self) -> np.ndarray:
        return np.block([[self.x0, self.x1], [np.zeros_like(self.x0), -self.x0]])

    def minimal_lifting(self, ctx: NilpotentContext) -> MinimalLifting:
        # z21 = -x0 and z12 = -z21* = -x0 (x0 anti-Hermitian)
        z0 = antisymmetric_minimal_lifting(ctx, self.x1, -self.x0, np.zeros_like(self.x1))
        return MinimalLifting(z0, operator_norm(z0))


def antisymmetry_check(ctx: NilpotentContext, b: np.ndarray, x: np.ndarray) -> bool:
    """Pull x back to N along mu(b) and test for [[x0, x1], [0, -x0]] with x0 anti-Hermitian."""
    mu = nilpotent_cross_section(ctx, b)
    pulled = adjoint(mu) @ np.asarray(x, dtype=np.complex128) @ mu
    if not range_membership_N(ctx, pulled):
        LOGGER.debug("Pulled-back vector is not tangent at N")
        return False
    x0 = ctx.blocks(pulled)[0]
    return _small(x0 + adjoint(x0), operator_norm(pulled))
