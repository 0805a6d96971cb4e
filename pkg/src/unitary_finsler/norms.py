"""Operator and Schatten norms used as Finsler metrics, and the p-norm Hessian form."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from unitary_finsler.errors import DomainError, ImaginaryResidue
from unitary_finsler.linalg import adjoint, commutator, functional_calculus

IMAGINARY_TOLERANCE = 1e-8


class NormKind(str, enum.Enum):
    OPERATOR = "operator"
    SCHATTEN = "schatten"
    NORMALIZED_SCHATTEN = "normalized"


def _check_even(p: int, minimum: int = 2) -> int:
    if int(p) != p or p < minimum or p % 2:
        raise DomainError(f"p must be an even integer >= {minimum}, got {p}")
    return int(p)


@dataclass(frozen=True)
class FinslerNorm:
    """Selects the operator norm or a (possibly trace-normalized) Schatten p-norm."""

    kind: NormKind = NormKind.OPERATOR
    p: Optional[int] = None

    def __post_init__(self) -> None:
        if self.kind is NormKind.OPERATOR:
            if self.p is not None:
                raise DomainError("the operator norm takes no exponent")
        else:
            _check_even(self.p if self.p is not None else -1)

    @classmethod
    def operator(cls) -> "FinslerNorm":
        return cls(NormKind.OPERATOR)

    @classmethod
    def schatten(cls, p: int) -> "FinslerNorm":
        return cls(NormKind.SCHATTEN, p)

    @classmethod
    def normalized(cls, p: int) -> "FinslerNorm":
        return cls(NormKind.NORMALIZED_SCHATTEN, p)

    @classmethod
    def parse(cls, name: str, p: Optional[int] = None, normalized: bool = False) -> "FinslerNorm":
        if name == NormKind.OPERATOR.value:
            return cls.operator()
        if name == NormKind.SCHATTEN.value:
            return cls.normalized(p) if normalized else cls.schatten(p)
        raise DomainError(f"unknown norm {name!r}")

    @property
    def is_normalized(self) -> bool:
        return self.kind is NormKind.NORMALIZED_SCHATTEN

    def trace_factor(self, dim: int) -> float:
        return 1.0 / dim if self.is_normalized else 1.0

    def of(self, x: np.ndarray) -> float:
        if self.kind is NormKind.OPERATOR:
            return operator_norm(x)
        return schatten_norm(x, self)

    def label(self) -> str:
        if self.kind is NormKind.OPERATOR:
            return "operator"
        return f"{'normalized-' if self.is_normalized else ''}schatten-{self.p}"


def operator_norm(x: np.ndarray) -> float:
    """Largest singular value."""
    arr = np.asarray(x)
    if arr.size == 0:
        return 0.0
    return float(scipy.linalg.svdvals(arr)[0])


def schatten_norm(x: np.ndarray, norm: FinslerNorm) -> float:
    if norm.kind is NormKind.OPERATOR:
        raise DomainError("schatten_norm needs a Schatten norm selection")
    arr = np.asarray(x)
    sigma = scipy.linalg.svdvals(arr)
    top = float(sigma[0]) if sigma.size else 0.0
    if top == 0.0:
        return 0.0
    # scaled by the top singular value so p = 64 stays finite
    total = np.sum((sigma / top) ** norm.p) * norm.trace_factor(arr.shape[0])
    return top * float(total) ** (1.0 / norm.p)


def _powers(a: np.ndarray, top: int) -> list[np.ndarray]:
    powers = [np.eye(a.shape[0], dtype=np.complex128)]
    for _ in range(top):
        powers.append(powers[-1] @ a)
    return powers


def hessian_form(a: np.ndarray, b: np.ndarray, c: np.ndarray, p: int) -> float:
    """H_a(b, c) = (-1)^{p/2} p sum_{k=0}^{p-2} Tr(a^{p-2-k} b a^k c)."""
    p = _check_even(p, minimum=4)
    if not (a.shape == b.shape == c.shape):
        raise DomainError("hessian_form needs equal dimensions")
    powers = _powers(a, p - 2)
    terms = [np.trace(powers[p - 2 - k] @ b @ powers[k] @ c) for k in range(p - 1)]
    value = (-1) ** (p // 2) * p * complex(np.sum(terms))
    scale = max(1.0, p * float(np.sum(np.abs(terms))))
    if abs(value.imag) > IMAGINARY_TOLERANCE * scale:
        raise ImaginaryResidue(f"imaginary part {value.imag:.3e} exceeds tolerance; inputs not anti-Hermitian")
    return float(value.real)


def quadratic_form(a: np.ndarray, b: np.ndarray, p: int) -> float:
    return hessian_form(a, b, b, p)


def quadratic_form_identity(a: np.ndarray, b: np.ndarray, p: int) -> float:
    """p‖b a^{p/2-1}‖₂² + (p/2) Σ_{l+m=p/2-2} ‖a^l (ab+ba) a^m‖₂²."""
    p = _check_even(p, minimum=4)
    half = p // 2
    powers = _powers(a, half)
    anticommutator = a @ b + b @ a
    value = p * np.linalg.norm(b @ powers[half - 1], "fro") ** 2
    for l in range(half - 1):
        m = half - 2 - l
        value += half * np.linalg.norm(powers[l] @ anticommutator @ powers[m], "fro") ** 2
    return float(value)


def second_derivative_oracle(a: np.ndarray, b: np.ndarray, p: int, h: float = 0.1) -> float:
    """Five-point second difference of s -> (-1)^{p/2} Tr((a + s b)^p) at s = 0."""
    p = _check_even(p, minimum=4)

    def trace_power(s: float) -> float:
        return float(((-1) ** (p // 2) * np.trace(np.linalg.matrix_power(a + s * b, p))).real)

    stencil = (-trace_power(2 * h) + 16 * trace_power(h) - 30 * trace_power(0.0) + 16 * trace_power(-h) - trace_power(-2 * h))
    return stencil / (12 * h * h)


@dataclass
class HessianReport:
    H_value: float
    Q_b: float
    property1_lhs: float
    property1_rhs: float
    property2_lhs: float
    property2_rhs: float

    @property
    def property1_slack(self) -> float:
        return self.property1_rhs - self.property1_lhs

    @property
    def property2_gap(self) -> float:
        return abs(self.property2_lhs - self.property2_rhs)

    @property
    def is_ok(self) -> bool:
        scale = max(1.0, abs(self.property2_lhs), abs(self.property2_rhs))
        return self.property1_slack >= -1e-9 * max(1.0, self.property1_rhs) and self.property2_gap <= 1e-9 * scale


def check_hessian_properties(a: np.ndarray, b: np.ndarray, p: int) -> HessianReport:
    """Evaluate Q_a([b, a]) <= 4‖a‖²Q_a(b) and the sum-of-squares identity for Q_a(b)."""
    q_b = quadratic_form(a, b, p)
    return HessianReport(
        H_value=hessian_form(a, b, a, p),
        Q_b=q_b,
        property1_lhs=quadratic_form(a, commutator(b, a), p),
        property1_rhs=4 * operator_norm(a) ** 2 * q_b,
        property2_lhs=q_b,
        property2_rhs=quadratic_form_identity(a, b, p),
    )


def elementary_inequalities(x: np.ndarray, y: np.ndarray, p: int) -> tuple[float, float, float, float]:
    """(‖xy‖_p, ‖x‖‖y‖_p, ‖|x|y‖_p, ‖xy‖_p) for the two elementary Schatten facts."""
    norm = FinslerNorm.schatten(p)
    modulus = functional_calculus(adjoint(x) @ x, lambda v: np.sqrt(np.clip(v, 0.0, None)))
    xy = schatten_norm(x @ y, norm)
    return xy, operator_norm(x) * schatten_norm(y, norm), schatten_norm(modulus @ y, norm), xy
