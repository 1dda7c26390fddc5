from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

from mpmath import mp, mpf

from app.errors import InvalidArgumentError
from app.services.exact_arith import PiScaledRational


class Family(str, Enum):
    """The four rank 1 simple groups, tagged by their CLI spelling."""

    SO = "so"
    SU = "su"
    SP = "sp"
    F4 = "f4"


class DensityKind(str, Enum):
    TANH_FULL = "TANH_FULL"
    TANH_HALF = "TANH_HALF"
    COTH_HALF = "COTH_HALF"
    POLYNOMIAL = "POLYNOMIAL"


class AGKind(str, Enum):
    """a(G) = pi or pi/2; the Bernoulli terms scale by (pi/a(G))^(2p)."""

    A_PI = "A_PI"
    A_PI_HALF = "A_PI_HALF"


class ZetaKind(str, Enum):
    RESIDUE = "RESIDUE"
    SPECIAL_VALUE = "SPECIAL_VALUE"


class Branch(str, Enum):
    BELOW_D2 = "BELOW_D2"
    AT_D2 = "AT_D2"
    ABOVE_D2 = "ABOVE_D2"
    ODD_SO = "ODD_SO"


@dataclass(frozen=True)
class QuadraticFactor:
    """One factor ``r2 * r**2 + const`` of the Plancherel polynomial."""

    r2: Fraction
    const: Fraction

    def __str__(self) -> str:
        r2 = "" if self.r2 == 1 else f"{self.r2}*"
        if self.const == 0:
            return f"{r2}r^2"
        return f"({r2}r^2 + {self.const})"


@dataclass(frozen=True)
class EvenPolynomial:
    """Even polynomial sum_j coeffs[j] * r**(2j)."""

    coeffs: tuple[Fraction, ...]

    @classmethod
    def from_factors(cls, factors: tuple[QuadraticFactor, ...]) -> EvenPolynomial:
        coeffs = [Fraction(1)]
        for factor in factors:
            expanded = [Fraction(0)] * (len(coeffs) + 1)
            for j, a in enumerate(coeffs):
                expanded[j] += a * factor.const
                expanded[j + 1] += a * factor.r2
            coeffs = expanded
        return cls(tuple(coeffs))

    @property
    def degree(self) -> int:
        for j in range(len(self.coeffs) - 1, -1, -1):
            if self.coeffs[j] != 0:
                return 2 * j
        return 0

    def a(self, index: int) -> Fraction:
        """Coefficient a_{index} of r**index (zero outside the stored range or for odd index)."""
        if index < 0 or index % 2:
            return Fraction(0)
        j = index // 2
        return self.coeffs[j] if j < len(self.coeffs) else Fraction(0)

    def __call__(self, r):
        """Exact for int/Fraction arguments; mpmath numbers are evaluated in their own context."""
        if isinstance(r, (int, Fraction)):
            coeffs: list = list(self.coeffs)
        else:
            ctx = getattr(r, "context", mp)
            r = ctx.mpf(r)
            coeffs = [ctx.mpf(c.numerator) / c.denominator for c in self.coeffs]
        r2 = r * r
        value = coeffs[-1]
        for coeff in reversed(coeffs[:-1]):
            value = value * r2 + coeff
        return value


@dataclass(frozen=True)
class SpaceDescriptor:
    family: Family
    n: int | None
    d: int
    rho0: Fraction
    c_g: PiScaledRational
    a_g_kind: AGKind | None
    density_kind: DensityKind
    factors: tuple[QuadraticFactor, ...]
    polynomial: EvenPolynomial

    @property
    def label(self) -> str:
        if self.family is Family.F4:
            return "F4(-20)"
        prefix = {Family.SO: "SO1", Family.SU: "SU", Family.SP: "SP"}[self.family]
        return f"{prefix}({self.n},1)"

    @property
    def symmetric_space(self) -> str:
        if self.family is Family.SO:
            return f"SO_1({self.n},1)/SO({self.n})"
        if self.family is Family.SU:
            return f"SU({self.n},1)/U({self.n})"
        if self.family is Family.SP:
            return f"SP({self.n},1)/(SP({self.n})xSP(1))"
        return "F4(-20)/Spin(9)"

    @property
    def is_odd_dimensional(self) -> bool:
        return self.density_kind is DensityKind.POLYNOMIAL

    @property
    def is_cotangent(self) -> bool:
        return self.density_kind is DensityKind.COTH_HALF


@dataclass(frozen=True)
class SpectralParams:
    """chi(1), Vol(Gamma\\G) and the multiplicity n0(chi) of the zero eigenvalue."""

    chi_dim: int = 1
    volume: Fraction = Fraction(1)
    n0: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "volume", Fraction(self.volume))
        if self.chi_dim < 1:
            raise InvalidArgumentError(f"chi_dim must be >= 1, got {self.chi_dim}")
        if self.volume <= 0:
            raise InvalidArgumentError(f"volume must be > 0, got {self.volume}")
        if self.n0 < 0:
            raise InvalidArgumentError(f"n0 must be >= 0, got {self.n0}")

    @property
    def scale(self) -> Fraction:
        return self.chi_dim * self.volume


@dataclass(frozen=True)
class ZetaResult:
    kind: ZetaKind
    location: Fraction
    value: PiScaledRational
    n0_term: int = 0

    def scaled(self, params: SpectralParams) -> PiScaledRational:
        """chi(1) Vol value, without the n0 term."""
        return self.value * params.scale

    def total(self, params: SpectralParams, dps: int = 30) -> mpf:
        return self.n0_term + self.scaled(params).to_mpf(dps)


@dataclass(frozen=True)
class CoefficientEntry:
    k: int
    value: PiScaledRational
    branch: Branch


@dataclass(frozen=True)
class CoefficientTable:
    """A_k per unit chi(1) Vol(Gamma\\G) for k = 0..k_max."""

    desc: SpaceDescriptor
    entries: tuple[CoefficientEntry, ...]
    k_max: int

    def __post_init__(self) -> None:
        if [e.k for e in self.entries] != list(range(self.k_max + 1)):
            raise InvalidArgumentError("coefficient table entries must be dense in k = 0..k_max")

    def value(self, k: int) -> PiScaledRational:
        return self.entries[k].value

    @property
    def values(self) -> list[PiScaledRational]:
        return [e.value for e in self.entries]


@dataclass(frozen=True)
class ExpansionEvaluation:
    t: mpf
    partial_sums: tuple[mpf, ...]


@dataclass(frozen=True)
class QuadratureConfig:
    decimal_digits: int = 60
    tail_epsilon: float = 1e-70
    t_grid: tuple[float, ...] = ()
    richardson_depth: int = 9
    max_degree: int = 10
    residual_tolerance: float = 1e-4

    def __post_init__(self) -> None:
        object.__setattr__(self, "t_grid", tuple(float(t) for t in self.t_grid))
        if self.decimal_digits < 30:
            raise InvalidArgumentError(f"decimal_digits must be >= 30, got {self.decimal_digits}")
        if self.richardson_depth < 1:
            raise InvalidArgumentError(f"richardson_depth must be >= 1, got {self.richardson_depth}")
        if not 0 < self.tail_epsilon < 1:
            raise InvalidArgumentError(f"tail_epsilon must lie in (0, 1), got {self.tail_epsilon}")
        if any(t <= 0 for t in self.t_grid):
            raise InvalidArgumentError("t_grid values must be positive")
        if any(b >= a for a, b in zip(self.t_grid, self.t_grid[1:], strict=False)):
            raise InvalidArgumentError("t_grid must be strictly decreasing")
        if self.t_grid and self.richardson_depth > len(self.t_grid) - 1:
            raise InvalidArgumentError(
                f"richardson_depth {self.richardson_depth} needs at least {self.richardson_depth + 1} grid points, "
                f"got {len(self.t_grid)}"
            )


@dataclass(frozen=True)
class VerificationRow:
    k: int
    extracted: mpf
    exact: mpf | None = None
    rel_error: mpf | None = None
    passed: bool | None = None


@dataclass(frozen=True)
class VerificationReport:
    desc: SpaceDescriptor
    per_k: tuple[VerificationRow, ...]
    config: QuadratureConfig
    tolerance: float | None = None
    params: SpectralParams = field(default_factory=SpectralParams)

    @property
    def passed(self) -> bool | None:
        """None for extraction-only reports (no exact side)."""
        if any(row.passed is None for row in self.per_k):
            return None
        return all(row.passed for row in self.per_k)

    @property
    def failing(self) -> list[int]:
        return [row.k for row in self.per_k if row.passed is False]


@dataclass(frozen=True)
class MellinRow:
    """Both sides of the truncated Mellin relation at one real s > d/2."""

    s: Fraction
    spectral: mpf
    pole_series: mpf
    rel_error: mpf
    passed: bool


@dataclass(frozen=True)
class MellinReport:
    desc: SpaceDescriptor
    tau: float
    n_terms: int
    decimal_digits: int
    tolerance: float
    rows: tuple[MellinRow, ...]

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows)
