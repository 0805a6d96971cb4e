"""Seeded random instances shared by the experiment suites and the tests."""
from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from unitary_finsler.linalg import adjoint, mat_exp
from unitary_finsler.norms import FinslerNorm, operator_norm


def trial_generator(seed: int, trial: int) -> np.random.Generator:
    """Counter-based stream for one trial; independent of scheduling order."""
    return np.random.Generator(np.random.Philox(key=(int(seed) << 64) | int(trial)))


def random_complex(rng: np.random.Generator, rows: int, cols: Optional[int] = None) -> np.ndarray:
    cols = rows if cols is None else cols
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def random_hermitian(rng: np.random.Generator, dim: int, scale: Optional[float] = None) -> np.ndarray:
    g = random_complex(rng, dim)
    h = (g + adjoint(g)) / 2
    if scale is not None:
        h *= scale / max(operator_norm(h), 1e-300)
    return h


def random_antihermitian(
    rng: np.random.Generator, dim: int, scale: Optional[float] = None, norm: Optional[FinslerNorm] = None
) -> np.ndarray:
    """Random anti-Hermitian matrix, rescaled to ``scale`` in ``norm`` (operator norm by default)."""
    x = 1j * random_hermitian(rng, dim)
    if scale is not None:
        measure = norm or FinslerNorm.operator()
        x *= scale / max(measure.of(x), 1e-300)
    return x


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    q, r = np.linalg.qr(random_complex(rng, dim))
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def random_projection(rng: np.random.Generator, dim: int, rank: int) -> np.ndarray:
    frame = random_unitary(rng, dim)[:, :rank]
    return frame @ adjoint(frame)


def random_projection_pair(
    rng: np.random.Generator,
    corners: Sequence[int] = (0, 0, 0, 0),
    angles: Sequence[float] = (),
) -> tuple[np.ndarray, np.ndarray]:
    """Pair (p0, p1) with prescribed corner dimensions and generic angles.

    ``corners`` = (dim H00, dim H01, dim H10, dim H11); each angle in (0, pi/2)
    contributes one two-dimensional generic block.  Everything is rotated by a
    random unitary.
    """
    d00, d01, d10, d11 = corners
    dim = d00 + d01 + d10 + d11 + 2 * len(angles)
    p0 = np.zeros(dim)
    p1 = np.zeros((dim, dim), dtype=np.complex128)
    index = 0
    for flags, count in (((0, 0), d00), ((0, 1), d01), ((1, 0), d10), ((1, 1), d11)):
        for _ in range(count):
            p0[index] = flags[0]
            p1[index, index] = flags[1]
            index += 1
    for angle in angles:
        c, s = np.cos(angle), np.sin(angle)
        p0[index] = 1.0
        p1[index : index + 2, index : index + 2] = [[c * c, c * s], [c * s, s * s]]
        index += 2
    basis = random_unitary(rng, dim)
    return basis @ np.diag(p0).astype(np.complex128) @ adjoint(basis), basis @ p1 @ adjoint(basis)


def random_orbit_point(rng: np.random.Generator, eigenvalues: Sequence[float], multiplicities: Sequence[int]) -> np.ndarray:
    diagonal = np.repeat(np.asarray(eigenvalues, dtype=float), multiplicities)
    u = random_unitary(rng, diagonal.size)
    return u @ np.diag(diagonal).astype(np.complex128) @ adjoint(u)


def near_identity_unitary(rng: np.random.Generator, dim: int, scale: float) -> np.ndarray:
    return mat_exp(random_antihermitian(rng, dim, scale))
