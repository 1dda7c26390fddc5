"""
Machine-readable records for the command line.

Every exact value is written twice: as {"coeff": "p/q", "pi_half_exp": h}
and as a decimal string. JSON and CSV share one row model, ``OutputRow``;
``parse_record`` reads either format back into exact values.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from app.errors import InvalidArgumentError
from app.models import (
    AGKind,
    CoefficientTable,
    SpaceDescriptor,
    SpectralParams,
    VerificationReport,
    ZetaResult,
)
from app.services.exact_arith import PiScaledRational, working_precision
from app.services.heat import coefficient_table

SCHEMA_VERSION = "1.0"
CSV_COLUMNS = ("k", "coeff_num", "coeff_den", "pi_half_exp", "decimal")
GUARD_DIGITS = 10


@dataclass(frozen=True)
class OutputRow:
    key: str
    value: PiScaledRational | None
    extras: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class Record:
    kind: str
    rows: tuple[OutputRow, ...]
    space: SpaceDescriptor | None = None
    params: SpectralParams | None = None
    meta: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class ParsedRecord:
    schema_version: str
    kind: str
    values: tuple[tuple[str, PiScaledRational | None], ...]
    space: dict[str, Any] | None = None


def exact_json(value: PiScaledRational) -> dict[str, Any]:
    return {"coeff": str(value.coeff), "pi_half_exp": value.pi_half_exponent}


def decimal_string(value, precision: int) -> str:
    """``precision`` significant digits of a PiScaledRational or mpf."""
    with working_precision(precision + GUARD_DIGITS) as ctx:
        number = value.to_mpf(ctx=ctx) if isinstance(value, PiScaledRational) else ctx.mpf(value)
        return ctx.nstr(number, precision)


def space_record(desc: SpaceDescriptor) -> dict[str, Any]:
    a_g = None
    if desc.a_g_kind is not None:
        a_g = "pi" if desc.a_g_kind is AGKind.A_PI else "pi/2"
    return {
        "label": desc.label,
        "family": desc.family.value,
        "n": desc.n,
        "d": desc.d,
        "rho0": str(desc.rho0),
        "c_g": exact_json(desc.c_g),
        "a_g": a_g,
        "density_kind": desc.density_kind.value,
        "symmetric_space": desc.symmetric_space,
        "factors": [str(f) for f in desc.factors],
    }


def _params_record(params: SpectralParams) -> dict[str, Any]:
    return {"chi_dim": params.chi_dim, "volume": str(params.volume), "n0": params.n0}


def catalog_rows(spaces: list[SpaceDescriptor]) -> tuple[OutputRow, ...]:
    """One row per space; the exact value is C_G."""
    return tuple(
        OutputRow(
            key=desc.label,
            value=desc.c_g,
            extras={
                "family": desc.family.value,
                "n": desc.n,
                "d": desc.d,
                "rho0": str(desc.rho0),
                "density_kind": desc.density_kind.value,
            },
        )
        for desc in spaces
    )


def polynomial_rows(desc: SpaceDescriptor) -> tuple[OutputRow, ...]:
    """a_{2j} keyed by the power of r."""
    return tuple(
        OutputRow(key=str(2 * j), value=PiScaledRational(a_2j)) for j, a_2j in enumerate(desc.polynomial.coeffs)
    )


def table_rows(table: CoefficientTable, params: SpectralParams) -> tuple[OutputRow, ...]:
    return tuple(
        OutputRow(key=str(entry.k), value=entry.value * params.scale, extras={"branch": entry.branch.value})
        for entry in table.entries
    )


def zeta_rows(results: list[ZetaResult], params: SpectralParams) -> tuple[OutputRow, ...]:
    """Scaled zeta data; a nonzero -n0 shift at s = 0 gets its own row."""
    rows = []
    for result in results:
        rows.append(
            OutputRow(key=str(result.location), value=result.scaled(params), extras={"kind": result.kind.value})
        )
        if result.n0_term:
            rows.append(OutputRow(key="n0_term", value=PiScaledRational(result.n0_term), extras={"kind": "N0_TERM"}))
    return tuple(rows)


def report_rows(
    report: VerificationReport, table: CoefficientTable | None, precision: int
) -> tuple[OutputRow, ...]:
    """Exact side from ``table`` (already per unit chi Vol) when there is one."""
    rows = []
    for row in report.per_k:
        exact = table.value(row.k) * report.params.scale if table is not None else None
        rows.append(
            OutputRow(
                key=str(row.k),
                value=exact,
                extras={
                    "extracted": decimal_string(row.extracted, precision),
                    "rel_error": None if row.rel_error is None else decimal_string(row.rel_error, 3),
                    "passed": row.passed,
                },
            )
        )
    return tuple(rows)


def _row_json(row: OutputRow, precision: int) -> dict[str, Any]:
    data: dict[str, Any] = {"k": row.key}
    if row.value is None:
        data["value"] = None
        data["decimal"] = None
    else:
        data["value"] = exact_json(row.value)
        data["decimal"] = decimal_string(row.value, precision)
    data.update(row.extras)
    return data


def to_json(record: Record, precision: int) -> str:
    payload: dict[str, Any] = {"rows": [_row_json(row, precision) for row in record.rows]}
    payload.update(record.meta)
    document: dict[str, Any] = {"schema_version": SCHEMA_VERSION, "kind": record.kind}
    if record.space is not None:
        document["space"] = space_record(record.space)
    if record.params is not None:
        document["params"] = _params_record(record.params)
    document["payload"] = payload
    return json.dumps(document, indent=2)


def to_csv(record: Record, precision: int) -> str:
    extra_columns: list[str] = []
    for row in record.rows:
        extra_columns.extend(key for key in row.extras if key not in extra_columns)
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=[*CSV_COLUMNS, *extra_columns], lineterminator="\n")
    writer.writeheader()
    for row in record.rows:
        values: dict[str, Any] = {"k": row.key}
        if row.value is not None:
            values.update(
                coeff_num=row.value.coeff.numerator,
                coeff_den=row.value.coeff.denominator,
                pi_half_exp=row.value.pi_half_exponent,
                decimal=decimal_string(row.value, precision),
            )
        values.update({key: "" if value is None else value for key, value in row.extras.items()})
        writer.writerow(values)
    return buffer.getvalue()


def render(record: Record, fmt: str, precision: int) -> str:
    if fmt == "json":
        return to_json(record, precision)
    if fmt == "csv":
        return to_csv(record, precision)
    raise InvalidArgumentError(f"unknown output format {fmt!r}")


def _exact_from_json(value: dict[str, Any] | None) -> PiScaledRational | None:
    if value is None:
        return None
    return PiScaledRational(Fraction(value["coeff"]), int(value["pi_half_exp"]))


def parse_record(text: str) -> ParsedRecord:
    """
    Rebuild the exact values of an emitted JSON or CSV record.

    CSV carries no header block, so its schema version and kind are reported as
    the current version and "csv".

    Raises:
            InvalidArgumentError: If the text is neither a record nor a CSV table
    """
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            document = json.loads(stripped)
            rows = document["payload"]["rows"]
            values = tuple((str(row["k"]), _exact_from_json(row["value"])) for row in rows)
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
            raise InvalidArgumentError(f"malformed JSON record: {e}") from e
        return ParsedRecord(document["schema_version"], document["kind"], values, document.get("space"))

    reader = csv.DictReader(io.StringIO(stripped))
    if reader.fieldnames is None or list(reader.fieldnames[: len(CSV_COLUMNS)]) != list(CSV_COLUMNS):
        raise InvalidArgumentError("CSV record must start with columns " + ",".join(CSV_COLUMNS))
    parsed = []
    for row in reader:
        if row["coeff_num"] == "":
            parsed.append((row["k"], None))
            continue
        coeff = Fraction(int(row["coeff_num"]), int(row["coeff_den"]))
        parsed.append((row["k"], PiScaledRational(coeff, int(row["pi_half_exp"]))))
    return ParsedRecord(SCHEMA_VERSION, "csv", tuple(parsed))


def verification_record(report: VerificationReport, precision: int) -> Record:
    """Record of a report; the exact side is rebuilt from the closed forms when it exists."""
    desc = report.desc
    table = None if desc.is_cotangent else coefficient_table(desc, len(report.per_k) - 1)
    return Record(
        kind="verification",
        rows=report_rows(report, table, precision),
        space=desc,
        params=report.params,
        meta={
            "passed": report.passed,
            "tolerance": report.tolerance,
            "decimal_digits": report.config.decimal_digits,
            "t_grid": list(report.config.t_grid),
        },
    )
