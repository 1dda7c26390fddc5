"""
Residues and special values of the spectral zeta function zeta_Gamma(s; chi).

All values are exact and per unit chi(1) Vol(Gamma\\G); callers scale with
``SpectralParams``. The only non-proportional contribution, -n0(chi) at s = 0,
is carried separately in ``ZetaResult.n0_term``.

Two branches exist:

- d even (every space except SO_1(2n+1,1)): simple poles at s = 1..d/2 and
  special values at s = -n built from Bernoulli numbers through b_p(j).
- SO_1(2n+1,1): simple poles at s = d/2 - k for all k >= 0, zeta(0) = -n0 and
  zeta(-k) = 0 for k >= 1.

The SU(q,1), q even, density carries coth(pi r/2) and has no closed form here.
"""

from __future__ import annotations

import logging
from fractions import Fraction

from app.errors import InvalidArgumentError, NotCoveredError
from app.models import AGKind, SpaceDescriptor, SpectralParams, ZetaKind, ZetaResult
from app.services.exact_arith import (
    PiScaledRational,
    bernoulli,
    binomial,
    factorial,
    gamma_half_integer,
)

logger = logging.getLogger(__name__)

QUARTER = Fraction(1, 4)


def _require_covered(desc: SpaceDescriptor) -> None:
    if desc.is_cotangent:
        raise NotCoveredError(desc.label)


def _require_even_branch(desc: SpaceDescriptor) -> None:
    _require_covered(desc)
    if desc.is_odd_dimensional:
        raise InvalidArgumentError(f"{desc.label} has odd dimension; use the half-integer pole formulas")


def _half_n(desc: SpaceDescriptor) -> int:
    """n in SO_1(2n+1,1); equals rho_0."""
    if not desc.is_odd_dimensional:
        raise InvalidArgumentError(f"{desc.label} is not of the form SO_1(2n+1,1)")
    return (desc.d - 1) // 2


def b_coefficient(p: int, j: int, desc: SpaceDescriptor) -> Fraction:
    """
    b_p(j) = [2^(1-2(p+j)) - 1] [pi/a(G)]^(2(p+j)) (-1)^j B_{2(p+j)} / (2(p+j) (p-1)!).

    [pi/a(G)] is 1 when a(G) = pi and 2 when a(G) = pi/2, so the result is rational.

    Raises:
            InvalidArgumentError: If p < 1, j < 0 or the space has no a(G)
    """
    if p < 1 or j < 0:
        raise InvalidArgumentError(f"b_p(j) requires p >= 1 and j >= 0, got p={p}, j={j}")
    if desc.a_g_kind is None:
        _require_covered(desc)
        raise InvalidArgumentError(f"a(G) is undefined for {desc.label}")
    s = p + j
    pi_over_a = 1 if desc.a_g_kind is AGKind.A_PI else 2
    sign = -1 if j % 2 else 1
    return (
        (Fraction(1, 2 ** (2 * s - 1)) - 1)
        * Fraction(pi_over_a) ** (2 * s)
        * sign
        * bernoulli(2 * s)
        / (2 * s * factorial(p - 1))
    )


def residue_at(desc: SpaceDescriptor, m: int) -> PiScaledRational:
    """
    Residue of zeta at s = m, 1 <= m <= d/2, for the even-dimensional branch.

    (1/4) C_G sum_{j=0}^{d/2-m} (-1)^j C(m+j-1, j) rho_0^(2j) a_{2(m+j-1)}
    """
    _require_even_branch(desc)
    half_d = desc.d // 2
    if not 1 <= m <= half_d:
        raise InvalidArgumentError(f"residue location m={m} outside 1..{half_d} for {desc.label}")
    poly = desc.polynomial
    total = Fraction(0)
    for j in range(half_d - m + 1):
        sign = -1 if j % 2 else 1
        total += sign * binomial(m + j - 1, j) * desc.rho0 ** (2 * j) * poly.a(2 * (m + j - 1))
    return desc.c_g * (QUARTER * total)


def residue_at_half(desc: SpaceDescriptor, k: int) -> PiScaledRational:
    """
    Residue of zeta at s = d/2 - k for SO_1(2n+1,1), d/2 = n + 1/2, k >= 0.

    Gamma ratios are evaluated exactly; the Gamma(n + 1/2 - k) denominator may
    have a negative half-integer argument when k > n.
    """
    n = _half_n(desc)
    if k < 0:
        raise InvalidArgumentError(f"k must be >= 0, got {k}")
    poly = desc.polynomial
    rho0 = desc.rho0
    denominator = gamma_half_integer(2 * n + 1 - 2 * k)

    total = PiScaledRational.zero()
    if k >= n:
        for j in range(n + 1):
            sign = -1 if (j + n + k) % 2 else 1
            term = gamma_half_integer(2 * j + 1) * (
                sign * rho0 ** (2 * (j + k - n)) * poly.a(2 * j) / factorial(j - n + k)
            )
            total += term
    else:
        for j in range(k + 1):
            sign = -1 if j % 2 else 1
            term = gamma_half_integer(2 * (n - k + j) + 1) * (
                sign * rho0 ** (2 * j) * poly.a(2 * (n - k + j)) / factorial(j)
            )
            total += term
    return desc.c_g * QUARTER * total / denominator


def special_value(desc: SpaceDescriptor, n: int, params: SpectralParams | None = None) -> ZetaResult:
    """
    zeta(-n), n >= 0.

    Returns:
            ZetaResult whose value is per unit chi(1) Vol and whose n0_term is
            -n0(chi) at n = 0 and 0 otherwise
    """
    _require_covered(desc)
    if n < 0:
        raise InvalidArgumentError(f"special values are taken at s = -n with n >= 0, got n={n}")
    params = params or SpectralParams()
    n0_term = -params.n0 if n == 0 else 0

    if desc.is_odd_dimensional:
        return ZetaResult(ZetaKind.SPECIAL_VALUE, Fraction(-n), PiScaledRational.zero(), n0_term)

    poly = desc.polynomial
    rho0 = desc.rho0
    half_d = desc.d // 2
    n_fact = factorial(n)
    total = Fraction(0)
    for j in range(half_d):
        a_2j = poly.a(2 * j)
        if a_2j == 0:
            continue
        sign = 1 if j % 2 else -1
        # (n+1)(n+2)...(n+j+1) = (n+j+1)!/n!
        total += sign * factorial(j) * rho0 ** (2 * (j + n + 1)) * a_2j * n_fact / factorial(n + j + 1)
        bernoulli_part = Fraction(0)
        for k in range(n + 1):
            k_sign = -1 if k % 2 else 1
            bernoulli_part += k_sign * n_fact / factorial(n - k) * rho0 ** (2 * (n - k)) * b_coefficient(k + 1, j, desc)
        total += 2 * bernoulli_part * a_2j

    value = desc.c_g * (QUARTER * total)
    logger.debug("Special value computed", extra={"space": desc.label, "n": n, "value": str(value)})
    return ZetaResult(ZetaKind.SPECIAL_VALUE, Fraction(-n), value, n0_term)


def pole_locations(desc: SpaceDescriptor, count: int | None = None) -> list[Fraction]:
    """
    Possible simple poles of zeta: 1..d/2 (d even), or d/2 - k for k < count (d odd).
    """
    _require_covered(desc)
    if desc.is_odd_dimensional:
        if count is None or count < 0:
            raise InvalidArgumentError("odd-dimensional spaces have infinitely many poles; pass count >= 0")
        return [Fraction(desc.d, 2) - k for k in range(count)]
    return [Fraction(m) for m in range(desc.d // 2, 0, -1)]


def zeta_residues(desc: SpaceDescriptor, count: int | None = None) -> list[ZetaResult]:
    """ZetaResult records for every pole returned by ``pole_locations``."""
    results = []
    for location in pole_locations(desc, count):
        if desc.is_odd_dimensional:
            k = int(Fraction(desc.d, 2) - location)
            value = residue_at_half(desc, k)
        else:
            value = residue_at(desc, int(location))
        results.append(ZetaResult(ZetaKind.RESIDUE, location, value))
    return results


def residue_from_coefficient(desc: SpaceDescriptor, k: int, coefficient: PiScaledRational) -> PiScaledRational:
    """
    Invert A_k = (4 pi)^(d/2) Gamma(d/2 - k) Res_{s = d/2 - k}.

    Only defined where s = d/2 - k is a pole: k < d/2 for even d, any k for odd d.
    """
    _require_covered(desc)
    if k < 0 or (not desc.is_odd_dimensional and k >= desc.d // 2):
        raise InvalidArgumentError(f"s = d/2 - {k} is not a pole location for {desc.label}")
    gamma = gamma_half_integer(desc.d - 2 * k)
    return coefficient / (PiScaledRational.four_pi_power(desc.d) * gamma)
