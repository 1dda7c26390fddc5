"""
Command-line interface for heat coefficients of rank 1 locally symmetric spaces.

Usage:
    heatcoeff catalog --max-dim 16                      # List admissible spaces
    heatcoeff poly --family sp --n 2                    # Plancherel polynomial coefficients
    heatcoeff zeta --family so --n 4 --residues         # Residues of the spectral zeta function
    heatcoeff zeta --family so --n 2 --special 0        # zeta(0)
    heatcoeff coeffs --family so --n 2 --kmax 4         # Exact A_0..A_4
    heatcoeff verify --family so --n 4 --kmax 3         # Compare against the numerical oracle
    heatcoeff sweep                                     # Verify the standard grid of spaces

Exit codes: 0 success, 1 invalid argument or not covered, 2 usage error,
3 verification failure or exhausted precision.
"""

from __future__ import annotations

import json
import logging
import sys
from collections.abc import Iterator
from contextlib import contextmanager
from fractions import Fraction
from typing import Any

import click

from app import configure_logging
from app.config import quadrature_config_from, resolve_settings
from app.errors import (
    DualPathMismatchError,
    InvalidArgumentError,
    NotCoveredError,
    PrecisionExhaustedError,
    VerificationFailedError,
)
from app.models import SpectralParams
from app.services.catalog import admissible_spaces, describe
from app.services.heat import coefficient_table, curvature_ratio
from app.services.oracle import verify as verify_space
from app.services.records import (
    SCHEMA_VERSION,
    Record,
    catalog_rows,
    polynomial_rows,
    render,
    table_rows,
    verification_record,
    zeta_rows,
)
from app.services.zeta import special_value, zeta_residues
from app.tasks import DEFAULT_SWEEP, run_verification_task

__all__ = [
    "cli",
    "main",
    "run",
]

logger = logging.getLogger(__name__)

EXIT_DOMAIN_ERROR = 1
EXIT_VERIFICATION_FAILED = 3
DEFAULT_ODD_POLE_COUNT = 5


@contextmanager
def _domain_errors() -> Iterator[None]:
    try:
        yield
    except (InvalidArgumentError, NotCoveredError) as e:
        click.echo(f"Error: {e}", err=True)
        sys.exit(EXIT_DOMAIN_ERROR)
    except (VerificationFailedError, PrecisionExhaustedError, DualPathMismatchError) as e:
        click.echo(f"Error: {e}", err=True)
        sys.exit(EXIT_VERIFICATION_FAILED)


def _space_options(family_required: bool = True):
    """--family/--n plus the output and scaling flags shared by every subcommand."""

    def decorate(command):
        options = [
            click.option(
                "--family",
                type=click.Choice(["so", "su", "sp", "f4"], case_sensitive=False),
                required=family_required,
                help="Group family",
            ),
            click.option("--n", "n", type=int, default=None, help="Family parameter (absent for f4)"),
            click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True),
            click.option("--precision", type=int, default=None, help="Digits of decimal renderings"),
            click.option("--volume", default="1", show_default=True, help="Vol(Gamma\\G) as an exact decimal or p/q"),
            click.option("--chi-dim", type=int, default=1, show_default=True, help="chi(1)"),
            click.option("--n0", type=int, default=0, show_default=True, help="Multiplicity of the zero eigenvalue"),
        ]
        for option in reversed(options):
            command = option(command)
        return command

    return decorate


def _params(volume: str, chi_dim: int, n0: int) -> SpectralParams:
    try:
        exact_volume = Fraction(volume)
    except (ValueError, ZeroDivisionError) as e:
        raise InvalidArgumentError(f"volume must be a decimal or p/q, got {volume!r}") from e
    return SpectralParams(chi_dim=chi_dim, volume=exact_volume, n0=n0)


def _emit(ctx: click.Context, record: Record, fmt: str, precision: int | None) -> None:
    digits = precision if precision is not None else ctx.obj["HEAT_OUTPUT_PRECISION"]
    if digits < 1:
        raise InvalidArgumentError(f"precision must be >= 1, got {digits}")
    click.echo(render(record, fmt, digits), nl=fmt == "json")


@click.group()
@click.version_option(version="1.0.0", prog_name="heatcoeff")
@click.option("--config", "config_file", type=click.Path(dir_okay=False), default=None, help="key=value settings file")
@click.option("--log-level", default=None, help="Overrides LOG_LEVEL")
@click.pass_context
def cli(ctx: click.Context, config_file: str | None, log_level: str | None) -> None:
    """
    Exact heat coefficients A_k and spectral zeta data for rank 1 spaces.

    Examples:

        heatcoeff coeffs --family so --n 2 --kmax 2

        heatcoeff verify --family f4 --kmax 2 --digits 80 --tol 1e-6
    """
    with _domain_errors():
        ctx.obj = resolve_settings(config_file, LOG_LEVEL=log_level)
    configure_logging(ctx.obj["LOG_LEVEL"])


@cli.command()
@_space_options(family_required=False)
@click.option("--max-dim", type=int, default=20, show_default=True, help="Largest real dimension to list")
@click.pass_context
def catalog(ctx, family, n, fmt, precision, volume, chi_dim, n0, max_dim):
    """List admissible spaces, or describe one with --family/--n."""
    with _domain_errors():
        if family is None:
            if n is not None:
                raise InvalidArgumentError("--n needs --family")
            record = Record(kind="catalog", rows=catalog_rows(admissible_spaces(max_dim)))
        else:
            desc = describe(family.lower(), n)
            record = Record(kind="space", rows=catalog_rows([desc]), space=desc)
        _emit(ctx, record, fmt, precision)


@cli.command()
@_space_options()
@click.pass_context
def poly(ctx, family, n, fmt, precision, volume, chi_dim, n0):
    """Coefficients a_{2j} of the Plancherel polynomial P(r)."""
    with _domain_errors():
        desc = describe(family.lower(), n)
        _emit(ctx, Record(kind="polynomial", rows=polynomial_rows(desc), space=desc), fmt, precision)


@cli.command()
@_space_options()
@click.option("--residues", is_flag=True, help="Residues at every pole")
@click.option("--special", type=int, default=None, help="zeta(-N)")
@click.option("--count", type=int, default=DEFAULT_ODD_POLE_COUNT, show_default=True, help="Poles listed for odd d")
@click.pass_context
def zeta(ctx, family, n, fmt, precision, volume, chi_dim, n0, residues, special, count):
    """Residues (--residues) or a special value (--special N) of the spectral zeta function."""
    if residues == (special is not None):
        raise click.UsageError("pass exactly one of --residues or --special N")
    with _domain_errors():
        desc = describe(family.lower(), n)
        params = _params(volume, chi_dim, n0)
        if residues:
            results = zeta_residues(desc, count if desc.is_odd_dimensional else None)
        else:
            results = [special_value(desc, special, params)]
        record = Record(kind="zeta", rows=zeta_rows(results, params), space=desc, params=params)
        _emit(ctx, record, fmt, precision)


@cli.command()
@_space_options()
@click.option("--kmax", type=int, required=True, help="Highest coefficient index")
@click.pass_context
def coeffs(ctx, family, n, fmt, precision, volume, chi_dim, n0, kmax):
    """Exact heat coefficients A_0..A_kmax, cross-checked through the zeta function."""
    with _domain_errors():
        desc = describe(family.lower(), n)
        params = _params(volume, chi_dim, n0)
        table = coefficient_table(desc, kmax, params)
        meta: dict[str, Any] = {"k_max": kmax}
        if kmax >= 1:
            meta["curvature_ratio"] = str(curvature_ratio(table))
        record = Record(kind="coefficients", rows=table_rows(table, params), space=desc, params=params, meta=meta)
        _emit(ctx, record, fmt, precision)


@cli.command()
@_space_options()
@click.option("--kmax", type=int, required=True, help="Highest coefficient index")
@click.option("--digits", type=int, default=None, help="Working decimal digits (HEAT_DIGITS)")
@click.option("--tol", type=float, default=1e-8, show_default=True, help="Relative tolerance per coefficient")
@click.option("--t0", type=float, default=None, help="Largest grid point (HEAT_T0)")
@click.option("--grid-ratio", type=float, default=None, help="Geometric grid ratio (HEAT_GRID_RATIO)")
@click.option("--depth", type=int, default=None, help="Richardson depth (HEAT_RICHARDSON_DEPTH)")
@click.pass_context
def verify(ctx, family, n, fmt, precision, volume, chi_dim, n0, kmax, digits, tol, t0, grid_ratio, depth):
    """Extract A_k numerically from the heat trace and compare with the exact table."""
    settings = dict(ctx.obj)
    overrides = {"HEAT_DIGITS": digits, "HEAT_T0": t0, "HEAT_GRID_RATIO": grid_ratio, "HEAT_RICHARDSON_DEPTH": depth}
    settings.update({key: value for key, value in overrides.items() if value is not None})
    with _domain_errors():
        desc = describe(family.lower(), n)
        params = _params(volume, chi_dim, n0)
        report = verify_space(desc, params, kmax, tol, quadrature_config_from(settings, desc))
        digits_out = precision if precision is not None else settings["HEAT_OUTPUT_PRECISION"]
        _emit(ctx, verification_record(report, digits_out), fmt, precision)
        if report.passed is False:
            raise VerificationFailedError(desc.label, report.failing)


def _sweep_settings(settings: dict[str, Any], digits: int) -> dict[str, Any]:
    return {**settings, "HEAT_DIGITS": max(digits, settings["HEAT_DIGITS"])}


@cli.command()
@click.option("--enqueue", is_flag=True, help="Send tasks to the Celery broker and print their ids")
@click.pass_context
def sweep(ctx, enqueue):
    """Verify the standard grid of spaces through the Celery task."""
    if enqueue:
        for family, n, k_max, tolerance, digits in DEFAULT_SWEEP:
            result = run_verification_task.delay(family, n, k_max, tolerance, _sweep_settings(ctx.obj, digits))
            click.echo(f"{family}\t{'' if n is None else n}\t{result.id}")
        logger.info("Sweep dispatched", extra={"tasks": len(DEFAULT_SWEEP)})
        return

    records = []
    with _domain_errors():
        for family, n, k_max, tolerance, digits in DEFAULT_SWEEP:
            result = run_verification_task.apply(args=(family, n, k_max, tolerance, _sweep_settings(ctx.obj, digits)))
            records.append(result.get())
    click.echo(json.dumps({"schema_version": SCHEMA_VERSION, "kind": "sweep", "records": records}, indent=2))
    failing = [record["space"]["label"] for record in records if record["payload"]["passed"] is False]
    if failing:
        click.echo(f"Error: verification failed for {', '.join(failing)}", err=True)
        sys.exit(EXIT_VERIFICATION_FAILED)


def run(argv: list[str]) -> int:
    """Run the CLI on ``argv`` and return its exit code."""
    try:
        cli.main(args=argv, prog_name="heatcoeff", standalone_mode=True)
    except SystemExit as e:
        code = e.code
        if code is None:
            return 0
        return code if isinstance(code, int) else 1
    return 0


def main() -> None:
    sys.exit(run(sys.argv[1:]))
