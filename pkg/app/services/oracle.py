"""
Numerical oracle for the heat coefficients.

Only the identity term of the trace formula is integrated:

    h_t(1) = (1/4pi) exp(-rho_0^2 t) int_R exp(-r^2 t) |C(r)|^-2 dr

The geodesic contribution vanishes faster than any power of t as t -> 0+, so
the small-t expansion of chi(1) Vol h_t(1) carries every A_k. Coefficients are
recovered by peeling: E_0(t) = (4 pi t)^(d/2) chi(1) Vol h_t(1), A_k is the
extrapolated limit of E_k at t = 0 and E_{k+1}(t) = (E_k(t) - A_k) / t.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence

import numpy as np
from mpmath import MPContext, mpf

from app.errors import InvalidArgumentError, PrecisionExhaustedError
from app.models import (
    CoefficientTable,
    DensityKind,
    QuadratureConfig,
    SpaceDescriptor,
    SpectralParams,
    VerificationReport,
    VerificationRow,
)
from app.services.exact_arith import detach, working_precision
from app.services.heat import coefficient_table, scale

logger = logging.getLogger(__name__)

DEFAULT_GRID_RATIO = 0.5
DEFAULT_RICHARDSON_DEPTH = 9
# E_0 varies like exp(-rho_0^2 t); keep rho_0^2 t0 small
T0_SCALE = 0.05
# digits lost per peeled coefficient, on top of a fixed reserve
DIGITS_PER_PEEL = 10
DIGITS_RESERVE = 15


def default_t0(desc: SpaceDescriptor) -> float:
    return T0_SCALE / (1.0 + float(desc.rho0) ** 2)


def geometric_t_grid(t0: float, ratio: float = DEFAULT_GRID_RATIO, depth: int = DEFAULT_RICHARDSON_DEPTH) -> tuple:
    """depth + 1 points t0, t0*ratio, ..., t0*ratio**depth."""
    if not 0 < ratio < 1:
        raise InvalidArgumentError(f"grid ratio must lie in (0, 1), got {ratio}")
    if t0 <= 0:
        raise InvalidArgumentError(f"t0 must be positive, got {t0}")
    return tuple(float(t) for t in t0 * ratio ** np.arange(depth + 1))


def quadrature_config(
    desc: SpaceDescriptor,
    decimal_digits: int = 60,
    t0: float | None = None,
    ratio: float = DEFAULT_GRID_RATIO,
    depth: int = DEFAULT_RICHARDSON_DEPTH,
    tail_epsilon: float | None = None,
    max_degree: int = 10,
    residual_tolerance: float = 1e-4,
) -> QuadratureConfig:
    """QuadratureConfig with a geometric grid scaled to the space's rho_0."""
    if tail_epsilon is None:
        tail_epsilon = 10.0 ** -(decimal_digits + 10)
    return QuadratureConfig(
        decimal_digits=decimal_digits,
        tail_epsilon=tail_epsilon,
        t_grid=geometric_t_grid(t0 if t0 is not None else default_t0(desc), ratio, depth),
        richardson_depth=depth,
        max_degree=max_degree,
        residual_tolerance=residual_tolerance,
    )


def _one_minus_exp(ctx: MPContext, y: mpf) -> mpf:
    """1 - exp(-y) without cancellation near y = 0."""
    return -ctx.expm1(-y)


def _tanh(ctx: MPContext, y: mpf, tail_epsilon: mpf) -> mpf:
    if 2 * y > -ctx.log(tail_epsilon):
        return ctx.mpf(1)
    numerator = _one_minus_exp(ctx, 2 * y)
    return numerator / (2 - numerator)


def _x_coth(ctx: MPContext, x: mpf, y: mpf, tail_epsilon: mpf) -> mpf:
    """x * coth(y) with y = pi x / 2; the x = 0 limit is 2/pi."""
    if x == 0:
        return 2 / ctx.pi
    if 2 * y > -ctx.log(tail_epsilon):
        return x
    denominator = _one_minus_exp(ctx, 2 * y)
    return x * (2 - denominator) / denominator


def _density(ctx: MPContext, desc: SpaceDescriptor, x: mpf, tail_epsilon: mpf) -> mpf:
    base = desc.c_g.to_mpf(ctx=ctx) * ctx.pi * desc.polynomial(x)
    kind = desc.density_kind
    if kind is DensityKind.POLYNOMIAL:
        return base
    if kind is DensityKind.TANH_FULL:
        return base * x * _tanh(ctx, ctx.pi * x, tail_epsilon)
    if kind is DensityKind.TANH_HALF:
        return base * x * _tanh(ctx, ctx.pi * x / 2, tail_epsilon)
    return base * _x_coth(ctx, x, ctx.pi * x / 2, tail_epsilon)


def density_eval(
    desc: SpaceDescriptor, r, config: QuadratureConfig | None = None, ctx: MPContext | None = None
) -> mpf:
    """
    Plancherel density |C(r)|^-2.

    C_G pi r P(r) tanh(pi r), C_G pi r P(r) tanh(pi r/2), C_G pi r P(r) coth(pi r/2)
    or C_G pi P(r), depending on the density kind. Evaluated at |r|, so it is even.
    With ``ctx`` the value is computed in and belongs to that context; otherwise
    it is computed privately at the precision of ``mp``.
    """
    if ctx is None:
        with working_precision() as private:
            return detach(density_eval(desc, r, config, private))
    tail_epsilon = ctx.mpf(config.tail_epsilon) if config else ctx.mpf(10) ** -(ctx.dps + 10)
    return _density(ctx, desc, abs(ctx.mpf(r)), tail_epsilon)


def _cutoff_radius(ctx: MPContext, desc: SpaceDescriptor, t: mpf, tail_epsilon: mpf) -> mpf:
    """R with the Gaussian-damped tail beyond R below tail_epsilon."""
    return ctx.sqrt((ctx.log(1 / tail_epsilon) + (desc.d + 2) * ctx.log(1 + 1 / t)) / t)


def _breakpoints(ctx: MPContext, cutoff: mpf) -> list[mpf]:
    points = [ctx.mpf(0)]
    edge = ctx.mpf(1)
    while edge < cutoff:
        points.append(edge)
        edge *= 2
    points.append(cutoff)
    return points


def _identity(
    ctx: MPContext, desc: SpaceDescriptor, params: SpectralParams, t, config: QuadratureConfig
) -> mpf:
    t_mp = ctx.mpf(t)
    tail_epsilon = ctx.mpf(config.tail_epsilon)
    cutoff = _cutoff_radius(ctx, desc, t_mp, tail_epsilon)

    def integrand(r):
        return ctx.exp(-r * r * t_mp) * _density(ctx, desc, r, tail_epsilon)

    half_integral, error = ctx.quad(integrand, _breakpoints(ctx, cutoff), maxdegree=config.max_degree, error=True)
    if half_integral and error / abs(half_integral) > ctx.mpf(10) ** -(config.decimal_digits - 10):
        relative = float(error / abs(half_integral))
        logger.warning(
            "Quadrature error above target",
            extra={"space": desc.label, "t": float(t_mp), "relative_error": relative},
        )
        raise PrecisionExhaustedError(None, relative, config.decimal_digits, t=float(t_mp))
    rho0 = ctx.mpf(desc.rho0.numerator) / desc.rho0.denominator
    h_t = ctx.exp(-(rho0**2) * t_mp) * 2 * half_integral / (4 * ctx.pi)
    logger.debug("Identity term integrated", extra={"space": desc.label, "t": float(t_mp), "cutoff": float(cutoff)})
    return params.scale.numerator * h_t / params.scale.denominator


def heat_identity_numeric(
    desc: SpaceDescriptor, params: SpectralParams, t, config: QuadratureConfig
) -> mpf:
    """
    chi(1) Vol(Gamma\\G) h_t(1) by tanh-sinh quadrature over [0, R], doubled.

    Raises:
            InvalidArgumentError: If t <= 0
            PrecisionExhaustedError: If the quadrature error estimate exceeds
                    10^-(decimal_digits - 10) relative to the integral
    """
    if t <= 0:
        raise InvalidArgumentError(f"t must be positive, got {t}")
    with working_precision(config.decimal_digits) as ctx:
        return detach(_identity(ctx, desc, params, t, config))


def gaussian_moment_identity(desc: SpaceDescriptor, params: SpectralParams, t, dps: int = 60) -> mpf:
    """
    Closed form of chi(1) Vol h_t(1) for the polynomial density of SO_1(2m+1,1).

    int_R exp(-r^2 t) r^(2j) dr = Gamma(j + 1/2) t^(-j-1/2), hence
    h_t(1) = (C_G/4) exp(-rho_0^2 t) sum_j a_{2j} Gamma(j + 1/2) t^(-j-1/2).
    """
    if desc.density_kind is not DensityKind.POLYNOMIAL:
        raise InvalidArgumentError(f"{desc.label} has no polynomial Plancherel density")
    if t <= 0:
        raise InvalidArgumentError(f"t must be positive, got {t}")
    with working_precision(dps) as ctx:
        t_mp = ctx.mpf(t)
        half = ctx.mpf(1) / 2
        total = ctx.mpf(0)
        for j, a_2j in enumerate(desc.polynomial.coeffs):
            total += ctx.mpf(a_2j.numerator) / a_2j.denominator * ctx.gamma(j + half) * t_mp ** (-j - half)
        rho0 = ctx.mpf(desc.rho0.numerator) / desc.rho0.denominator
        h_t = desc.c_g.to_mpf(ctx=ctx) / 4 * ctx.exp(-(rho0**2) * t_mp) * total
        return detach(params.scale.numerator * h_t / params.scale.denominator)


def richardson_limit(ts: Sequence, values: Sequence, depth: int, ctx: MPContext | None = None) -> tuple[mpf, mpf]:
    """
    Extrapolate values(t) to t = 0 assuming a power series in t.

    Neville's scheme at zero; on a geometric grid this is Richardson
    extrapolation with ``depth`` elimination columns.

    Returns:
            (limit estimate, absolute change contributed by the last column)

    Raises:
            InvalidArgumentError: If there are fewer than depth + 1 samples
    """
    if len(ts) != len(values) or len(ts) < 2:
        raise InvalidArgumentError("richardson_limit needs at least two matching samples")
    if not 1 <= depth <= len(ts) - 1:
        raise InvalidArgumentError(f"depth {depth} needs between 1 and {len(ts) - 1} columns for {len(ts)} samples")
    if ctx is None:
        with working_precision() as private:
            limit, change = richardson_limit(ts, values, depth, private)
            return detach(limit), detach(change)
    table = [[ctx.mpf(v)] for v in values]
    for i in range(1, len(ts)):
        for j in range(1, min(i, depth) + 1):
            t_far, t_near = ctx.mpf(ts[i - j]), ctx.mpf(ts[i])
            table[i].append((t_far * table[i][j - 1] - t_near * table[i - 1][j - 1]) / (t_far - t_near))
    last = table[-1]
    return last[depth], abs(last[depth] - last[depth - 1])


def _scaled_e0(desc: SpaceDescriptor, params: SpectralParams, config: QuadratureConfig) -> list[mpf]:
    samples = []
    with working_precision(config.decimal_digits) as ctx:
        for t in config.t_grid:
            value = _identity(ctx, desc, params, t, config)
            samples.append((4 * ctx.pi * ctx.mpf(t)) ** (ctx.mpf(desc.d) / 2) * value)
    return samples


def extract_coeffs_numeric(
    desc: SpaceDescriptor, params: SpectralParams, k_max: int, config: QuadratureConfig
) -> list[mpf]:
    """
    Recover chi(1) Vol A_0..A_{k_max} from the quadrature by peeling.

    Raises:
            InvalidArgumentError: On a bad k_max, t grid or Richardson depth
            PrecisionExhaustedError: When the extrapolation residual of some A_k
                    diverges or a quadrature misses its error target
    """
    if k_max < 0:
        raise InvalidArgumentError(f"k_max must be >= 0, got {k_max}")
    if len(config.t_grid) < 2 or not all(0 < t < 1 for t in config.t_grid):
        raise InvalidArgumentError("t_grid needs at least two points inside (0, 1)")
    if config.richardson_depth > len(config.t_grid) - 1:
        raise InvalidArgumentError(
            f"richardson_depth {config.richardson_depth} exceeds {len(config.t_grid) - 1} for the given t_grid"
        )
    if config.decimal_digits < DIGITS_RESERVE + DIGITS_PER_PEEL * k_max:
        logger.warning(
            "Working precision may be too low for peeling",
            extra={"space": desc.label, "digits": config.decimal_digits, "k_max": k_max},
        )

    coefficients: list[mpf] = []
    with working_precision(config.decimal_digits) as ctx:
        ts = [ctx.mpf(t) for t in config.t_grid]
        samples = [ctx.mpf(value) for value in _scaled_e0(desc, params, config)]
        for k in range(k_max + 1):
            limit, change = richardson_limit(ts, samples, config.richardson_depth, ctx)
            limit, change = ctx.mpf(limit), ctx.mpf(change)
            relative = change / abs(limit) if limit else (ctx.mpf(0) if change == 0 else ctx.inf)
            if relative > config.residual_tolerance:
                logger.warning(
                    "Richardson residual diverged",
                    extra={"space": desc.label, "k": k, "relative_residual": float(relative)},
                )
                raise PrecisionExhaustedError(k, float(relative), config.decimal_digits)
            coefficients.append(detach(limit))
            samples = [(value - limit) / t for value, t in zip(samples, ts, strict=True)]
    logger.info("Coefficients extracted", extra={"space": desc.label, "k_max": k_max})
    return coefficients


def verify(
    desc: SpaceDescriptor,
    params: SpectralParams,
    k_max: int,
    tolerance: float,
    config: QuadratureConfig,
) -> VerificationReport:
    """
    Compare the exact table with the extracted coefficients, k = 0..k_max.

    The cotangent case has no exact side; its report carries extracted values
    only and ``passed`` is None.
    """
    extracted = extract_coeffs_numeric(desc, params, k_max, config)
    if desc.is_cotangent:
        logger.warning("No exact coefficients for cotangent case", extra={"space": desc.label})
        rows = tuple(VerificationRow(k=k, extracted=value) for k, value in enumerate(extracted))
        return VerificationReport(desc=desc, per_k=rows, config=config, tolerance=None, params=params)

    table = coefficient_table(desc, k_max, params)
    rows_list = []
    with working_precision(config.decimal_digits) as ctx:
        for entry, value in zip(table.entries, extracted, strict=True):
            exact = scale(entry.value, params).to_mpf(ctx=ctx)
            error = abs(ctx.mpf(value) - exact)
            rel_error = error / abs(exact) if exact else error
            passed = bool(rel_error <= tolerance)
            if not passed:
                logger.warning(
                    "Coefficient outside tolerance",
                    extra={"space": desc.label, "k": entry.k, "rel_error": float(rel_error)},
                )
            rows_list.append(
                VerificationRow(
                    k=entry.k, extracted=value, exact=detach(exact), rel_error=detach(rel_error), passed=passed
                )
            )
    report = VerificationReport(desc=desc, per_k=tuple(rows_list), config=config, tolerance=tolerance, params=params)
    logger.info("Verification finished", extra={"space": desc.label, "k_max": k_max, "passed": report.passed})
    return report


def remainder_profile(
    table: CoefficientTable,
    params: SpectralParams,
    n_terms: int,
    ts: Sequence[float],
    config: QuadratureConfig,
) -> np.ndarray:
    """
    |(4 pi t)^(d/2) h_t(1) - sum_{k<=N} A_k t^k| / t^(N+1) per t, in units of chi(1) Vol.

    Stays bounded as t -> 0 when the expansion holds to order N.
    """
    if not 0 <= n_terms <= table.k_max:
        raise InvalidArgumentError(f"N={n_terms} outside 0..{table.k_max}")
    desc = table.desc
    ratios = []
    with working_precision(config.decimal_digits) as ctx:
        for t in ts:
            if t <= 0:
                raise InvalidArgumentError(f"t must be positive, got {t}")
            t_mp = ctx.mpf(t)
            oracle = _identity(ctx, desc, params, t, config) * params.scale.denominator / params.scale.numerator
            scaled = (4 * ctx.pi * t_mp) ** (ctx.mpf(desc.d) / 2) * oracle
            partial = sum((table.value(k).to_mpf(ctx=ctx) * t_mp**k for k in range(n_terms + 1)), ctx.mpf(0))
            ratios.append(float(abs(scaled - partial) / t_mp ** (n_terms + 1)))
    return np.asarray(ratios, dtype=np.float64)
