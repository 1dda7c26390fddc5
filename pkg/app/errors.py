"""
Exception hierarchy shared by every service module.

The CLI maps these onto exit codes; background tasks let them propagate so
Celery marks the run as failed.
"""

from __future__ import annotations


class HeatCoefficientError(Exception):
    """Base class for all domain errors raised by the package."""


class InvalidArgumentError(HeatCoefficientError, ValueError):
    """Input outside the admissible domain of an operation."""


class NotCoveredError(HeatCoefficientError):
    """The requested closed form does not exist (SU(q,1) with q even)."""

    def __init__(self, label: str, what: str = "closed forms") -> None:
        self.label = label
        super().__init__(f"cotangent case not covered by {what}: {label}")


class MixedExponentError(HeatCoefficientError, ArithmeticError):
    """Addition of pi-scaled values with different pi exponents."""

    def __init__(self, left: int, right: int) -> None:
        self.left = left
        self.right = right
        super().__init__(f"cannot add pi^({left}/2) and pi^({right}/2) terms")


class DualPathMismatchError(HeatCoefficientError):
    """Closed-form and zeta-derived coefficients disagree."""

    def __init__(self, label: str, k: int, closed: object, via_zeta: object) -> None:
        self.label = label
        self.k = k
        self.closed = closed
        self.via_zeta = via_zeta
        super().__init__(f"A_{k} mismatch for {label}: closed={closed} via_zeta={via_zeta}")


class PrecisionExhaustedError(HeatCoefficientError):
    """
    The working precision ran out.

    Either Richardson extrapolation stopped converging while peeling A_k, or
    the quadrature at some t missed its error target; ``t`` is set in the
    second case and ``k`` is None.
    """

    def __init__(self, k: int | None, residual: float, digits: int, t: float | None = None) -> None:
        self.k = k
        self.residual = residual
        self.digits = digits
        self.t = t
        if t is not None:
            message = f"quadrature at t={t:g} reached relative error {residual:.3e} at {digits} digits"
        else:
            message = f"precision exhausted extracting A_{k} (relative residual {residual:.3e} at {digits} digits)"
        super().__init__(message)


class VerificationFailedError(HeatCoefficientError):
    """A verification report did not pass its tolerance."""

    def __init__(self, label: str, failing: list[int]) -> None:
        self.label = label
        self.failing = failing
        super().__init__(f"verification failed for {label} at k={failing}")
