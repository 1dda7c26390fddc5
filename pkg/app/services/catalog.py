"""
Catalog of rank 1 symmetric spaces G/K.

For each admissible (family, n) this module produces the space descriptor:
real dimension d, rho_0, the Plancherel constant C_G, the constant a(G), the
density kind and the factored and expanded Plancherel polynomial P(r).

    SO_1(n,1)  d = n    rho_0 = (n-1)/2   C_G = [2^(2n-4) Gamma(n/2)^2]^-1
    SU(n,1)    d = 2n   rho_0 = n         C_G = [2^(2n-1) Gamma(n)^2]^-1
    SP(n,1)    d = 4n   rho_0 = 2n+1      C_G = [2^(4n+1) Gamma(2n)^2]^-1
    F4(-20)    d = 16   rho_0 = 11        C_G = [2^21 Gamma(8)^2]^-1
"""

from __future__ import annotations

import logging
from fractions import Fraction

from app.errors import InvalidArgumentError
from app.models import AGKind, DensityKind, EvenPolynomial, Family, QuadraticFactor, SpaceDescriptor
from app.services.exact_arith import PiScaledRational, gamma_half_integer

logger = logging.getLogger(__name__)

MIN_N = 2
F4_DIMENSION = 16


def _quarter(const: Fraction) -> QuadraticFactor:
    """Factor r^2/4 + const."""
    return QuadraticFactor(Fraction(1, 4), Fraction(const))


def _so_factors(n: int) -> tuple[QuadraticFactor, ...]:
    m, odd = divmod(n, 2)
    if odd:
        return tuple(QuadraticFactor(Fraction(1), Fraction(j * j)) for j in range(m))
    return tuple(QuadraticFactor(Fraction(1), Fraction((2 * j + 1) ** 2, 4)) for j in range(m - 1))


def _su_factors(n: int) -> tuple[QuadraticFactor, ...]:
    return tuple(_quarter(Fraction((n - 2 * j) ** 2, 4)) for j in range(1, n))


def _sp_factors(n: int) -> tuple[QuadraticFactor, ...]:
    factors = [_quarter(Fraction(1, 4))]
    for j in range(3, n + 2):
        factors.append(_quarter((n - j + Fraction(3, 2)) ** 2))
        factors.append(_quarter((n - j + Fraction(5, 2)) ** 2))
    return tuple(factors)


def _f4_factors() -> tuple[QuadraticFactor, ...]:
    factors = [_quarter(Fraction(1, 4)), _quarter(Fraction(9, 4))]
    factors.extend(_quarter(Fraction(2 * j + 1, 2) ** 2) for j in range(5))
    return tuple(factors)


def _plancherel_constant(power_of_two: int, twice_gamma_arg: int) -> PiScaledRational:
    """[2^power_of_two * Gamma(twice_gamma_arg/2)^2]^-1."""
    gamma = gamma_half_integer(twice_gamma_arg)
    return (PiScaledRational(Fraction(2) ** power_of_two) * gamma * gamma).inverse()


def _check_admissible(family: Family, n: int | None) -> None:
    if family is Family.F4:
        if n is not None:
            raise InvalidArgumentError("F4(-20) takes no parameter n")
        return
    if n is None or isinstance(n, bool) or not isinstance(n, int):
        raise InvalidArgumentError(f"{family.value} requires an integer parameter n")
    if n < MIN_N:
        raise InvalidArgumentError(f"{family.value}({n},1) is not admissible: n must be >= {MIN_N}")


def describe(family: Family | str, n: int | None = None) -> SpaceDescriptor:
    """
    Build the descriptor of one rank 1 space.

    Args:
            family: Family tag (or its CLI spelling "so", "su", "sp", "f4")
            n: Family parameter, n >= 2; must be None for F4(-20)

    Returns:
            Fully populated SpaceDescriptor

    Raises:
            InvalidArgumentError: If (family, n) is not admissible
    """
    try:
        family = Family(family)
    except ValueError as e:
        raise InvalidArgumentError(f"unknown family {family!r}") from e
    _check_admissible(family, n)

    if family is Family.SO:
        assert n is not None
        d = n
        rho0 = Fraction(n - 1, 2)
        c_g = _plancherel_constant(2 * n - 4, n)
        factors = _so_factors(n)
        if n % 2:
            density_kind, a_g_kind = DensityKind.POLYNOMIAL, None
        else:
            density_kind, a_g_kind = DensityKind.TANH_FULL, AGKind.A_PI
    elif family is Family.SU:
        assert n is not None
        d = 2 * n
        rho0 = Fraction(n)
        c_g = _plancherel_constant(2 * n - 1, 2 * n)
        factors = _su_factors(n)
        if n % 2:
            density_kind, a_g_kind = DensityKind.TANH_HALF, AGKind.A_PI_HALF
        else:
            density_kind, a_g_kind = DensityKind.COTH_HALF, None
    elif family is Family.SP:
        assert n is not None
        d = 4 * n
        rho0 = Fraction(2 * n + 1)
        c_g = _plancherel_constant(4 * n + 1, 4 * n)
        factors = _sp_factors(n)
        density_kind, a_g_kind = DensityKind.TANH_HALF, AGKind.A_PI_HALF
    else:
        d = F4_DIMENSION
        rho0 = Fraction(11)
        c_g = _plancherel_constant(21, 16)
        factors = _f4_factors()
        density_kind, a_g_kind = DensityKind.TANH_HALF, AGKind.A_PI_HALF

    desc = SpaceDescriptor(
        family=family,
        n=n,
        d=d,
        rho0=rho0,
        c_g=c_g,
        a_g_kind=a_g_kind,
        density_kind=density_kind,
        factors=factors,
        polynomial=EvenPolynomial.from_factors(factors),
    )
    logger.debug("Space described", extra={"space": desc.label, "d": d, "density_kind": density_kind.value})
    return desc


def plancherel_polynomial(desc: SpaceDescriptor) -> EvenPolynomial:
    """Expanded P(r); the empty product is the constant polynomial 1."""
    return EvenPolynomial.from_factors(desc.factors)


def expected_degree(desc: SpaceDescriptor) -> int:
    """d - 1 for SO_1(2m+1,1), d - 2 for every other group."""
    return desc.d - 1 if desc.is_odd_dimensional else desc.d - 2


def degree_check(desc: SpaceDescriptor) -> bool:
    return plancherel_polynomial(desc).degree == expected_degree(desc)


def admissible_spaces(max_dim: int) -> list[SpaceDescriptor]:
    """Every admissible space with d <= max_dim, in table order."""
    spaces: list[SpaceDescriptor] = []
    for family, dim_per_n in ((Family.SO, 1), (Family.SU, 2), (Family.SP, 4)):
        n = MIN_N
        while dim_per_n * n <= max_dim:
            spaces.append(describe(family, n))
            n += 1
    if F4_DIMENSION <= max_dim:
        spaces.append(describe(Family.F4))
    return spaces
