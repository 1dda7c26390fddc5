"""
Exact arithmetic for the closed-form heat and zeta formulas.

Rationals are plain ``fractions.Fraction`` values. Every closed form produced
by the package is a rational multiple of a power of sqrt(pi), which
``PiScaledRational`` represents exactly as ``coeff * pi**(pi_half_exponent/2)``.
Bernoulli numbers and half-integer gamma values are computed here and nowhere
else.
"""

from __future__ import annotations

import logging
import math
import threading
from collections.abc import Iterator
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction

from mpmath import MPContext, mp, mpf

from app.errors import InvalidArgumentError, MixedExponentError

logger = logging.getLogger(__name__)

_Scalar = int | Fraction

# B_0, B_1, ... in the B_1 = -1/2 convention, grown on demand
_BERNOULLI: list[Fraction] = [Fraction(1)]
_BERNOULLI_LOCK = threading.Lock()
_THREAD_STATE = threading.local()


def mp_context() -> MPContext:
    """
    mpmath context private to the calling thread.

    Package code changes precision only on these contexts; the shared ``mp``
    is read but never modified.
    """
    ctx = getattr(_THREAD_STATE, "ctx", None)
    if ctx is None:
        ctx = MPContext()
        _THREAD_STATE.ctx = ctx
    return ctx


@contextmanager
def working_precision(dps: int | None = None) -> Iterator[MPContext]:
    """This thread's context at ``dps`` digits (default: the precision of ``mp``)."""
    ctx = mp_context()
    with ctx.workdps(dps if dps is not None else mp.dps):
        yield ctx


def detach(value) -> mpf:
    """Rewrap a number of a private context as a global ``mpf`` without rounding."""
    return mp.make_mpf(value._mpf_)


@dataclass(frozen=True)
class PiScaledRational:
    """
    Exact value ``coeff * pi**(pi_half_exponent / 2)``.

    Zero is always stored as ``(0, 0)`` and is compatible with every exponent
    under addition. Any other addition between different exponents raises
    ``MixedExponentError``.
    """

    coeff: Fraction
    pi_half_exponent: int = 0

    def __post_init__(self) -> None:
        coeff = Fraction(self.coeff)
        object.__setattr__(self, "coeff", coeff)
        if coeff == 0:
            object.__setattr__(self, "pi_half_exponent", 0)

    @classmethod
    def zero(cls) -> PiScaledRational:
        return cls(Fraction(0), 0)

    @classmethod
    def one(cls) -> PiScaledRational:
        return cls(Fraction(1), 0)

    @classmethod
    def pi_power(cls, half_exponent: int, coeff: _Scalar = 1) -> PiScaledRational:
        """Return ``coeff * pi**(half_exponent/2)``."""
        return cls(Fraction(coeff), half_exponent)

    @classmethod
    def four_pi_power(cls, half_exponent: int) -> PiScaledRational:
        """Return ``(4*pi)**(half_exponent/2)``; 4**(h/2) = 2**h stays rational."""
        two_power = Fraction(2) ** half_exponent
        return cls(two_power, half_exponent)

    def is_zero(self) -> bool:
        return self.coeff == 0

    def _lift(self, other: object) -> PiScaledRational | None:
        if isinstance(other, PiScaledRational):
            return other
        if isinstance(other, (int, Fraction)):
            return PiScaledRational(Fraction(other), 0)
        return None

    def __add__(self, other: object) -> PiScaledRational:
        rhs = self._lift(other)
        if rhs is None:
            return NotImplemented
        if rhs.is_zero():
            return self
        if self.is_zero():
            return rhs
        if self.pi_half_exponent != rhs.pi_half_exponent:
            raise MixedExponentError(self.pi_half_exponent, rhs.pi_half_exponent)
        return PiScaledRational(self.coeff + rhs.coeff, self.pi_half_exponent)

    __radd__ = __add__

    def __neg__(self) -> PiScaledRational:
        return PiScaledRational(-self.coeff, self.pi_half_exponent)

    def __sub__(self, other: object) -> PiScaledRational:
        rhs = self._lift(other)
        if rhs is None:
            return NotImplemented
        return self + (-rhs)

    def __rsub__(self, other: object) -> PiScaledRational:
        lhs = self._lift(other)
        if lhs is None:
            return NotImplemented
        return lhs + (-self)

    def __mul__(self, other: object) -> PiScaledRational:
        rhs = self._lift(other)
        if rhs is None:
            return NotImplemented
        return PiScaledRational(self.coeff * rhs.coeff, self.pi_half_exponent + rhs.pi_half_exponent)

    __rmul__ = __mul__

    def inverse(self) -> PiScaledRational:
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero PiScaledRational")
        return PiScaledRational(1 / self.coeff, -self.pi_half_exponent)

    def __truediv__(self, other: object) -> PiScaledRational:
        rhs = self._lift(other)
        if rhs is None:
            return NotImplemented
        return self * rhs.inverse()

    def __rtruediv__(self, other: object) -> PiScaledRational:
        lhs = self._lift(other)
        if lhs is None:
            return NotImplemented
        return lhs * self.inverse()

    def __pow__(self, exponent: int) -> PiScaledRational:
        if exponent < 0:
            return self.inverse() ** (-exponent)
        return PiScaledRational(self.coeff**exponent, self.pi_half_exponent * exponent)

    def ratio(self, other: PiScaledRational) -> Fraction:
        """Exact rational ``self / other`` for operands sharing the pi exponent."""
        if other.is_zero():
            raise ZeroDivisionError("ratio with zero denominator")
        if self.is_zero():
            return Fraction(0)
        if self.pi_half_exponent != other.pi_half_exponent:
            raise MixedExponentError(self.pi_half_exponent, other.pi_half_exponent)
        return self.coeff / other.coeff

    def to_mpf(self, dps: int | None = None, ctx: MPContext | None = None) -> mpf:
        """
        Evaluate numerically.

        With ``ctx`` the value is computed in that context, at ``dps`` or its
        current precision, and belongs to it. Otherwise it is computed in the
        thread's private context at ``dps`` (default: the precision of ``mp``)
        and returned as a global ``mpf``.
        """
        if ctx is not None:
            if dps is None:
                return self._evaluate(ctx)
            with ctx.workdps(dps):
                return self._evaluate(ctx)
        with working_precision(dps) as private:
            return detach(self._evaluate(private))

    def _evaluate(self, ctx: MPContext) -> mpf:
        rational = ctx.mpf(self.coeff.numerator) / self.coeff.denominator
        if self.pi_half_exponent == 0:
            return rational
        return rational * ctx.pi ** (ctx.mpf(self.pi_half_exponent) / 2)

    def __float__(self) -> float:
        return float(self.to_mpf(30))

    def __str__(self) -> str:
        if self.pi_half_exponent == 0:
            return str(self.coeff)
        if self.pi_half_exponent % 2 == 0:
            power = self.pi_half_exponent // 2
            pi_text = "pi" if power == 1 else f"pi^{power}"
        else:
            pi_text = f"pi^({self.pi_half_exponent}/2)"
        return f"({self.coeff})*{pi_text}"


def bernoulli(m: int) -> Fraction:
    """
    Return the Bernoulli number B_m with B_1 = -1/2.

    Uses the recurrence sum_{r=0}^{n} C(n+1, r) B_r = 0; odd indices above 1
    are zero. Results are cached process-wide.
    """
    if m < 0:
        raise InvalidArgumentError(f"bernoulli index must be >= 0, got {m}")
    with _BERNOULLI_LOCK:
        if len(_BERNOULLI) <= m:
            logger.debug("Extending Bernoulli cache", extra={"from_index": len(_BERNOULLI), "to_index": m})
        while len(_BERNOULLI) <= m:
            n = len(_BERNOULLI)
            if n > 1 and n % 2 == 1:
                _BERNOULLI.append(Fraction(0))
                continue
            total = sum((math.comb(n + 1, r) * _BERNOULLI[r] for r in range(n)), Fraction(0))
            _BERNOULLI.append(-total / (n + 1))
        return _BERNOULLI[m]


def factorial(n: int) -> Fraction:
    if n < 0:
        raise InvalidArgumentError(f"factorial of negative integer {n}")
    return Fraction(math.factorial(n))


def binomial(n: int, k: int) -> Fraction:
    """Exact n-choose-k for 0 <= k <= n."""
    if n < 0 or k < 0:
        raise InvalidArgumentError(f"binomial arguments must be non-negative, got ({n}, {k})")
    if k > n:
        raise InvalidArgumentError(f"binomial requires k <= n, got ({n}, {k})")
    return Fraction(math.comb(n, k))


def half_gamma(m: int) -> PiScaledRational:
    """Gamma(m + 1/2) = pi^(1/2) (2m)! / (2^(2m) m!)."""
    if m < 0:
        raise InvalidArgumentError(f"half_gamma requires m >= 0, got {m}")
    coeff = Fraction(math.factorial(2 * m), 4**m * math.factorial(m))
    return PiScaledRational(coeff, 1)


def gamma_half_integer(twice_x: int) -> PiScaledRational:
    """
    Gamma(twice_x / 2) for any argument that is not a pole.

    Positive integers give factorials, positive half-integers go through
    ``half_gamma`` and negative half-integers use Gamma(x) = Gamma(x+1)/x
    applied exactly.
    """
    if twice_x % 2 == 0:
        if twice_x <= 0:
            raise InvalidArgumentError(f"Gamma has a pole at {twice_x // 2}")
        return PiScaledRational(factorial(twice_x // 2 - 1), 0)
    if twice_x > 0:
        return half_gamma((twice_x - 1) // 2)
    value = half_gamma(0)
    x = Fraction(1, 2)
    while 2 * x > twice_x:
        x -= 1
        value = value / x
    return value
