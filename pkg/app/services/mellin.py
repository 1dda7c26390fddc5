"""
Consistency of zeta data with the Plancherel density through the Mellin transform.

Per unit chi(1) Vol the identity term satisfies

    int_0^tau t^(s-1) h_t(1) dt = (1/2pi) int_0^inf mu(r) x^(-s) gamma(s, tau x) dr,

x = r^2 + rho_0^2, mu the Plancherel density and gamma the lower incomplete
Gamma function; both sides converge for real s > d/2. Gamma(s) zeta(s) has a
simple pole at s_k = d/2 - k with residue c_k = (4 pi)^(-d/2) A_k, so the same
integral also equals sum_k c_k tau^(s - s_k) / (s - s_k) up to the truncation
of the small-t expansion. The c_k are built here from zeta residues and special
values alone, so agreement ties the zeta module to the density without going
through the heat coefficient formulas.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from fractions import Fraction

from mpmath import MPContext, mpf

from app.errors import InvalidArgumentError, NotCoveredError
from app.models import MellinReport, MellinRow, SpaceDescriptor
from app.services.exact_arith import PiScaledRational, detach, factorial, gamma_half_integer, working_precision
from app.services.oracle import default_t0, density_eval
from app.services.zeta import residue_at, residue_at_half, special_value

logger = logging.getLogger(__name__)

DEFAULT_SERIES_TERMS = 10
DEFAULT_TOLERANCE = 1e-12


def pole_weight(desc: SpaceDescriptor, k: int) -> PiScaledRational:
    """
    Residue of Gamma(s) zeta(s) at s = d/2 - k, per unit chi(1) Vol.

    Below d/2 on the even branch the pole is zeta's and Gamma is regular;
    from d/2 on the pole is Gamma's at s = -n with weight (-1)^n/n! zeta(-n);
    on the odd branch every pole is zeta's at a half-integer.
    """
    if desc.is_cotangent:
        raise NotCoveredError(desc.label, "the Mellin relation")
    if k < 0:
        raise InvalidArgumentError(f"k must be >= 0, got {k}")
    if desc.is_odd_dimensional:
        return gamma_half_integer(desc.d - 2 * k) * residue_at_half(desc, k)
    half_d = desc.d // 2
    if k < half_d:
        return gamma_half_integer(desc.d - 2 * k) * residue_at(desc, half_d - k)
    n = k - half_d
    sign = -1 if n % 2 else 1
    # the volume part only; zero modes are not in the identity term
    return (Fraction(sign) / factorial(n)) * special_value(desc, n).value


def _as_mpf(ctx: MPContext, value: Fraction) -> mpf:
    return ctx.mpf(value.numerator) / value.denominator


def _pole_series(ctx: MPContext, weights: Sequence[PiScaledRational], desc: SpaceDescriptor, s: mpf, tau: mpf) -> mpf:
    total = ctx.mpf(0)
    for k, weight in enumerate(weights):
        if weight.is_zero():
            continue
        offset = s - ctx.mpf(desc.d) / 2 + k
        total += weight.to_mpf(ctx=ctx) * tau**offset / offset
    return total


def _breakpoints(ctx: MPContext, tau: mpf) -> list:
    # gamma(s, tau x) saturates once r is a few times 1/sqrt(tau)
    points = [ctx.mpf(0), ctx.mpf(1)]
    while points[-1] ** 2 * tau < 64:
        points.append(2 * points[-1])
    points.append(ctx.inf)
    return points


def _spectral_side(ctx: MPContext, desc: SpaceDescriptor, s: mpf, tau: mpf) -> mpf:
    rho0_sq = _as_mpf(ctx, desc.rho0) ** 2

    def integrand(r):
        x = r * r + rho0_sq
        return density_eval(desc, r, ctx=ctx) * ctx.gammainc(s, 0, tau * x) * x ** (-s)

    return ctx.quad(integrand, _breakpoints(ctx, tau)) / (2 * ctx.pi)


def mellin_check(
    desc: SpaceDescriptor,
    s_values: Sequence[Fraction] | None = None,
    tau: float | None = None,
    n_terms: int = DEFAULT_SERIES_TERMS,
    decimal_digits: int = 40,
    tolerance: float = DEFAULT_TOLERANCE,
) -> MellinReport:
    """
    Compare the truncated Mellin transform of h_t(1) over [0, tau] with its pole series.

    Defaults: s in {d/2 + 1, d/2 + 2}, tau = default_t0(desc) and the poles
    k = 0..n_terms. Each s must exceed d/2.

    Raises:
            NotCoveredError: For the cotangent case
            InvalidArgumentError: On s <= d/2, tau outside (0, 1) or n_terms < 0
    """
    if desc.is_cotangent:
        raise NotCoveredError(desc.label, "the Mellin relation")
    half_d = Fraction(desc.d, 2)
    if s_values is None:
        s_values = (half_d + 1, half_d + 2)
    s_values = tuple(Fraction(s) for s in s_values)
    if any(s <= half_d for s in s_values):
        raise InvalidArgumentError(f"s must exceed d/2 = {half_d}, got {[str(s) for s in s_values]}")
    tau = default_t0(desc) if tau is None else tau
    if not 0 < tau < 1:
        raise InvalidArgumentError(f"tau must lie in (0, 1), got {tau}")
    if n_terms < 0:
        raise InvalidArgumentError(f"n_terms must be >= 0, got {n_terms}")

    weights = [pole_weight(desc, k) for k in range(n_terms + 1)]
    rows = []
    with working_precision(decimal_digits) as ctx:
        tau_mp = ctx.mpf(tau)
        for s in s_values:
            s_mp = _as_mpf(ctx, s)
            spectral = _spectral_side(ctx, desc, s_mp, tau_mp)
            series = _pole_series(ctx, weights, desc, s_mp, tau_mp)
            rel_error = abs(spectral - series) / abs(spectral)
            passed = bool(rel_error <= tolerance)
            if not passed:
                logger.warning(
                    "Mellin relation violated",
                    extra={"space": desc.label, "s": str(s), "rel_error": float(rel_error)},
                )
            rows.append(
                MellinRow(
                    s=s,
                    spectral=detach(spectral),
                    pole_series=detach(series),
                    rel_error=detach(rel_error),
                    passed=passed,
                )
            )
    report = MellinReport(
        desc=desc,
        tau=tau,
        n_terms=n_terms,
        decimal_digits=decimal_digits,
        tolerance=tolerance,
        rows=tuple(rows),
    )
    logger.info("Mellin check finished", extra={"space": desc.label, "passed": report.passed})
    return report
