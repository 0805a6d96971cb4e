"""Exception hierarchy shared by the library and the command line."""
from __future__ import annotations

from typing import Optional, Sequence, Union


class UnitaryFinslerError(Exception):
    """Root of every error raised on purpose by this package."""


class NumericalDomainError(UnitaryFinslerError, ValueError):
    """An input lies outside the set where an operation is defined."""


class NonFiniteMatrix(NumericalDomainError):
    pass


class SymmetryViolation(NumericalDomainError):
    pass


class NotUnitary(NumericalDomainError):
    pass


class EigenvalueAtMinusOne(NumericalDomainError):
    """The principal logarithm is undefined: -1 is (numerically) an eigenvalue."""


class SingularTransport(NumericalDomainError):
    pass


class SingularMatrix(NumericalDomainError):
    pass


class FunctionalCalculusError(NumericalDomainError):
    pass


class ImaginaryResidue(NumericalDomainError):
    """A trace expression expected to be real came back with an imaginary part."""


class ClosedFormMismatch(NumericalDomainError):
    """A closed-form value disagrees with its direct evaluation beyond rounding."""


class DomainError(NumericalDomainError):
    pass


class OutOfDomain(NumericalDomainError):
    """The hypotheses of a convexity statement are not met by the probe."""


class SingleEigenvalue(NumericalDomainError):
    pass


class OutsideSection(NumericalDomainError):
    pass


class NotTangent(NumericalDomainError):
    pass


class NormTooLarge(NumericalDomainError):
    pass


class NotProjection(NumericalDomainError):
    pass


class NormOne(NumericalDomainError):
    """‖p0 - p1‖ reached 1; the direct rotation does not exist."""


class ComponentMismatch(NumericalDomainError):
    """dim(ker p0 ∩ R(p1)) differs from dim(R(p0) ∩ ker p1)."""


class NotOrbitShape(NumericalDomainError):
    pass


class NotInSection(NumericalDomainError):
    pass


class ConfigError(UnitaryFinslerError):
    pass


class MatrixFormatError(UnitaryFinslerError):
    """A matrix file could not be parsed; carries the location when known."""

    def __init__(
        self,
        message: str,
        *,
        path: Optional[str] = None,
        line: Optional[int] = None,
        column: Optional[int] = None,
        pointer: Sequence[Union[str, int]] = (),
    ):
        self.message = message
        self.pointer = tuple(pointer)
        self.path = path
        self.line = line
        self.column = column
        location = ""
        if line is not None:
            location = f" (line {line}, column {column})"
        prefix = f"{path}: " if path else ""
        super().__init__(f"{prefix}{message}{location}")
