"""
Heat coefficients A_k of omega_Gamma(t; chi) ~ (4 pi t)^(-d/2) sum_k A_k t^k.

Two exact routes produce every coefficient:

1. The closed forms: a finite sum over the Plancherel coefficients a_{2j}
   below d/2, the Bernoulli sums through b_p(j) from d/2 on, and a single
   Gamma-weighted sum for SO_1(2n+1,1).
2. The zeta route: A_k from the residue at s = d/2 - k, or from the special
   value zeta(k - d/2) once k >= d/2.

``coefficient_table`` builds the table from route 1 and refuses to return it
unless route 2 agrees exactly.
"""

from __future__ import annotations

import logging
from fractions import Fraction

from mpmath import mpf

from app.errors import DualPathMismatchError, InvalidArgumentError, NotCoveredError
from app.models import (
    Branch,
    CoefficientEntry,
    CoefficientTable,
    ExpansionEvaluation,
    SpaceDescriptor,
    SpectralParams,
)
from app.services.exact_arith import PiScaledRational, detach, factorial, gamma_half_integer, working_precision
from app.services.zeta import b_coefficient, residue_at, residue_at_half, special_value

logger = logging.getLogger(__name__)

PI = PiScaledRational.pi_power(2)


def _require_covered(desc: SpaceDescriptor, k: int) -> None:
    if desc.is_cotangent:
        raise NotCoveredError(desc.label)
    if k < 0:
        raise InvalidArgumentError(f"k must be >= 0, got {k}")


def branch_for(desc: SpaceDescriptor, k: int) -> Branch:
    if desc.is_odd_dimensional:
        return Branch.ODD_SO
    half_d = desc.d // 2
    if k < half_d:
        return Branch.BELOW_D2
    if k == half_d:
        return Branch.AT_D2
    return Branch.ABOVE_D2


def _even_prefactor(desc: SpaceDescriptor) -> PiScaledRational:
    """(4 pi)^(d/2 - 1) C_G pi"""
    return PiScaledRational.four_pi_power(desc.d - 2) * desc.c_g * PI


def _below_half_dimension(desc: SpaceDescriptor, k: int) -> PiScaledRational:
    half_d = desc.d // 2
    poly = desc.polynomial
    neg_rho_sq = -desc.rho0**2
    total = Fraction(0)
    for ell in range(k + 1):
        index = half_d - (ell + 1)
        assert index >= 0, "summation index left the polynomial range"
        total += neg_rho_sq ** (k - ell) / factorial(k - ell) * factorial(index) * poly.a(2 * index)
    return _even_prefactor(desc) * total


def _from_half_dimension(desc: SpaceDescriptor, n: int) -> PiScaledRational:
    half_d = desc.d // 2
    poly = desc.polynomial
    rho0 = desc.rho0
    total = Fraction(0)
    for j in range(half_d):
        a_2j = poly.a(2 * j)
        if a_2j == 0:
            continue
        sign = 1 if j % 2 else -1
        total += sign * rho0 ** (2 * (n + 1 + j)) * factorial(j) * a_2j / factorial(n + 1 + j)
        for ell in range(n + 1):
            ell_sign = -1 if ell % 2 else 1
            weight = rho0 ** (2 * (n - ell)) / factorial(n - ell)
            total += 2 * ell_sign * weight * b_coefficient(ell + 1, j, desc) * a_2j
    sign = -1 if n % 2 else 1
    return _even_prefactor(desc) * (sign * total)


def _odd_gamma_form(desc: SpaceDescriptor, k: int) -> PiScaledRational:
    """pi (4 pi)^(n - 1/2) C_G sum_l (-n^2)^(k-l) Gamma(n - l + 1/2) a_{2(n-l)} / (k-l)!"""
    n = (desc.d - 1) // 2
    poly = desc.polynomial
    total = PiScaledRational.zero()
    for ell in range(min(k, n) + 1):
        weight = Fraction(-(n**2)) ** (k - ell) * poly.a(2 * (n - ell)) / factorial(k - ell)
        total += gamma_half_integer(2 * (n - ell) + 1) * weight
    return PI * PiScaledRational.four_pi_power(2 * n - 1) * desc.c_g * total


def coeff_closed(desc: SpaceDescriptor, k: int) -> PiScaledRational:
    """
    A_k per unit chi(1) Vol(Gamma\\G) from the closed-form sums.

    Raises:
            NotCoveredError: For SU(q,1) with q even
            InvalidArgumentError: If k < 0
    """
    _require_covered(desc, k)
    if desc.is_odd_dimensional:
        return _odd_gamma_form(desc, k)
    half_d = desc.d // 2
    if k <= half_d - 1:
        return _below_half_dimension(desc, k)
    return _from_half_dimension(desc, k - half_d)


def coeff_closed_factorial(desc: SpaceDescriptor, k: int) -> PiScaledRational:
    """
    The SO_1(2n+1,1) closed form with Gamma(m + 1/2) written as pi^(1/2) (2m)! / (2^(2m) m!).

    Evaluated without ``gamma_half_integer`` so that it checks the Gamma form independently.
    """
    _require_covered(desc, k)
    if not desc.is_odd_dimensional:
        raise InvalidArgumentError(f"{desc.label} is not of the form SO_1(2n+1,1)")
    n = (desc.d - 1) // 2
    poly = desc.polynomial
    neg_rho_sq = -desc.rho0**2
    total = Fraction(0)
    for ell in range(min(k, n) + 1):
        m = n - ell
        total += (
            neg_rho_sq ** (k - ell)
            * factorial(2 * m)
            * poly.a(2 * m)
            / (factorial(k - ell) * factorial(m) * 2 ** (2 * m))
        )
    return PiScaledRational.pi_power(3) * PiScaledRational.four_pi_power(2 * n - 1) * desc.c_g * total


def coeff_via_zeta(desc: SpaceDescriptor, k: int, params: SpectralParams | None = None) -> PiScaledRational:
    """
    A_k per unit chi(1) Vol(Gamma\\G) from residues and special values of zeta.

    At k = d/2 the n0 added by the relation cancels the -n0 inside zeta(0),
    so the result does not depend on params.n0.
    """
    _require_covered(desc, k)
    params = params or SpectralParams()
    four_pi_half_d = PiScaledRational.four_pi_power(desc.d)

    if desc.is_odd_dimensional:
        return four_pi_half_d * gamma_half_integer(desc.d - 2 * k) * residue_at_half(desc, k)

    half_d = desc.d // 2
    if k < half_d:
        m = half_d - k
        return four_pi_half_d * factorial(m - 1) * residue_at(desc, m)
    if k == half_d:
        zeta_zero = special_value(desc, 0, params)
        leftover = params.n0 + zeta_zero.n0_term
        if leftover != 0:
            raise DualPathMismatchError(desc.label, k, "n0 cancellation", leftover)
        return four_pi_half_d * zeta_zero.value
    n = k - half_d
    sign = -1 if n % 2 else 1
    return four_pi_half_d * (sign / factorial(n)) * special_value(desc, n, params).value


def coefficient_table(
    desc: SpaceDescriptor, k_max: int, params: SpectralParams | None = None
) -> CoefficientTable:
    """
    Dense table A_0..A_{k_max}, each entry cross-checked against the zeta route.

    Raises:
            InvalidArgumentError: If k_max < 0
            NotCoveredError: For the cotangent case
            DualPathMismatchError: If the two exact routes disagree
    """
    if k_max < 0:
        raise InvalidArgumentError(f"k_max must be >= 0, got {k_max}")
    if desc.is_cotangent:
        raise NotCoveredError(desc.label)

    entries = []
    for k in range(k_max + 1):
        closed = coeff_closed(desc, k)
        via_zeta = coeff_via_zeta(desc, k, params)
        if closed != via_zeta:
            logger.error(
                "Dual path mismatch", extra={"space": desc.label, "k": k, "closed": str(closed), "zeta": str(via_zeta)}
            )
            raise DualPathMismatchError(desc.label, k, closed, via_zeta)
        logger.debug("Coefficient cross-checked", extra={"space": desc.label, "k": k, "value": str(closed)})
        entries.append(CoefficientEntry(k=k, value=closed, branch=branch_for(desc, k)))

    logger.info("Coefficient table built", extra={"space": desc.label, "k_max": k_max})
    return CoefficientTable(desc=desc, entries=tuple(entries), k_max=k_max)


def scale(value: PiScaledRational, params: SpectralParams) -> PiScaledRational:
    """chi(1) Vol(Gamma\\G) * value; volumes are exact rationals."""
    return value * params.scale


def curvature_ratio(table: CoefficientTable) -> Fraction:
    """A_1 / A_0, exactly; -n(n-1)/6 for SO_1(n,1)."""
    if table.k_max < 1:
        raise InvalidArgumentError("curvature ratio needs k_max >= 1")
    return table.value(1).ratio(table.value(0))


def expansion_partial_sums(
    table: CoefficientTable, params: SpectralParams, t: float | mpf, dps: int = 60
) -> ExpansionEvaluation:
    """chi(1) Vol (4 pi t)^(-d/2) sum_{k<=N} A_k t^k for every N = 0..k_max."""
    if t <= 0:
        raise InvalidArgumentError(f"t must be positive, got {t}")
    with working_precision(dps) as ctx:
        t_mp = ctx.mpf(t)
        scale_mp = ctx.mpf(params.scale.numerator) / params.scale.denominator
        prefactor = scale_mp * (4 * ctx.pi * t_mp) ** (-ctx.mpf(table.desc.d) / 2)
        running = ctx.mpf(0)
        sums = []
        for entry in table.entries:
            running += entry.value.to_mpf(ctx=ctx) * t_mp**entry.k
            sums.append(detach(prefactor * running))
    return ExpansionEvaluation(t=detach(t_mp), partial_sums=tuple(sums))


def evaluate_expansion(
    table: CoefficientTable, params: SpectralParams, t: float | mpf, n_terms: int, dps: int = 60
) -> mpf:
    """
    Truncated expansion with terms k = 0..n_terms.

    Raises:
            InvalidArgumentError: If n_terms is outside 0..k_max or t <= 0
    """
    if not 0 <= n_terms <= table.k_max:
        raise InvalidArgumentError(f"N={n_terms} outside 0..{table.k_max}")
    return expansion_partial_sums(table, params, t, dps).partial_sums[n_terms]
