"""
Tests for JSON and CSV records.
"""

import json
from fractions import Fraction

import pytest
from mpmath import mp, mpf

from app.errors import InvalidArgumentError
from app.models import SpectralParams, VerificationReport, VerificationRow
from app.services.catalog import admissible_spaces
from app.services.exact_arith import PiScaledRational
from app.services.heat import coefficient_table
from app.services.oracle import quadrature_config
from app.services.records import (
    SCHEMA_VERSION,
    Record,
    catalog_rows,
    decimal_string,
    parse_record,
    polynomial_rows,
    render,
    table_rows,
    to_csv,
    to_json,
    verification_record,
    zeta_rows,
)
from app.services.zeta import special_value

SO2_VALUES = [
    ("0", PiScaledRational(Fraction(1), 2)),
    ("1", PiScaledRational(Fraction(-1, 3), 2)),
    ("2", PiScaledRational(Fraction(1, 15), 2)),
]


@pytest.fixture
def so2_record(so2, unit_params):
    table = coefficient_table(so2, 2)
    return Record(kind="coefficients", rows=table_rows(table, unit_params), space=so2, params=unit_params)


@pytest.mark.unit
class TestRecords:
    """Tests for record rendering and parsing."""

    def test_json_document(self, so2_record):
        """Test the JSON layout carries schema, space and exact values."""
        document = json.loads(to_json(so2_record, 10))
        assert document["schema_version"] == SCHEMA_VERSION
        assert document["kind"] == "coefficients"
        assert document["space"]["label"] == "SO1(2,1)"
        assert document["space"]["a_g"] == "pi"
        assert document["params"] == {"chi_dim": 1, "volume": "1", "n0": 0}
        row = document["payload"]["rows"][1]
        assert row["value"] == {"coeff": "-1/3", "pi_half_exp": 2}
        assert row["decimal"] == "-1.047197551"
        assert row["branch"] == "AT_D2"

    def test_json_and_csv_agree(self, so2_record):
        """Test both formats rebuild the same exact values."""
        from_json = parse_record(to_json(so2_record, 20))
        from_csv = parse_record(to_csv(so2_record, 20))
        assert list(from_json.values) == SO2_VALUES
        assert list(from_csv.values) == SO2_VALUES
        assert from_json.kind == "coefficients"
        assert from_csv.kind == "csv"

    def test_csv_layout(self, so2_record):
        """Test fixed columns first, then row extras."""
        lines = to_csv(so2_record, 10).splitlines()
        assert lines[0] == "k,coeff_num,coeff_den,pi_half_exp,decimal,branch"
        assert lines[2] == "1,-1,3,2,-1.047197551,AT_D2"

    def test_decimals_share_digits(self, so2_record):
        """Test JSON and CSV print identical decimals."""
        document = json.loads(to_json(so2_record, 15))
        csv_decimals = [line.split(",")[4] for line in to_csv(so2_record, 15).splitlines()[1:]]
        assert [row["decimal"] for row in document["payload"]["rows"]] == csv_decimals

    def test_scaled_rows(self, so2):
        """Test rows carry chi(1) Vol A_k."""
        params = SpectralParams(chi_dim=2, volume=Fraction(3, 4))
        rows = table_rows(coefficient_table(so2, 0), params)
        assert rows[0].value == PiScaledRational(Fraction(3, 2), 2)

    def test_polynomial_rows(self, so4):
        """Test keys are powers of r."""
        rows = polynomial_rows(so4)
        assert [row.key for row in rows] == ["0", "2"]
        assert rows[0].value == PiScaledRational(Fraction(1, 4))

    def test_zeta_rows_with_n0(self, so2):
        """Test a nonzero n0 gets its own row."""
        params = SpectralParams(n0=2)
        rows = zeta_rows([special_value(so2, 0, params)], params)
        assert [row.key for row in rows] == ["0", "n0_term"]
        assert rows[0].value == PiScaledRational(Fraction(-1, 12))
        assert rows[1].value == PiScaledRational(Fraction(-2))

    def test_catalog_rows(self):
        """Test one row per space keyed by label."""
        rows = catalog_rows(admissible_spaces(3))
        assert [row.key for row in rows] == ["SO1(2,1)", "SO1(3,1)"]
        assert rows[1].extras["density_kind"] == "POLYNOMIAL"

    def test_decimal_string(self):
        """Test significant digits of exact and mpmath values."""
        assert decimal_string(PiScaledRational.pi_power(2), 5) == "3.1416"
        assert decimal_string(mpf(1) / 3, 4) == "0.3333"

    def test_render_unknown_format(self, so2_record):
        """Test an unknown format is rejected."""
        with pytest.raises(InvalidArgumentError):
            render(so2_record, "xml", 10)

    @pytest.mark.parametrize("text", ["{not json", '{"schema_version": "1.0"}', "a,b\n1,2\n"])
    def test_malformed(self, text):
        """Test malformed records raise."""
        with pytest.raises(InvalidArgumentError):
            parse_record(text)


@pytest.mark.unit
class TestVerificationRecord:
    """Tests for records of verification reports."""

    def test_passing_report(self, so2, unit_params):
        """Test the exact side is rebuilt and the verdict kept."""
        config = quadrature_config(so2, decimal_digits=40, depth=3)
        with mp.workdps(40):
            rows = (
                VerificationRow(k=0, extracted=mp.pi, exact=mp.pi, rel_error=mpf(0), passed=True),
                VerificationRow(k=1, extracted=-mp.pi / 3, exact=-mp.pi / 3, rel_error=mpf(0), passed=True),
            )
        report = VerificationReport(desc=so2, per_k=rows, config=config, tolerance=1e-8, params=unit_params)
        record = verification_record(report, 10)
        document = json.loads(to_json(record, 10))
        assert document["kind"] == "verification"
        assert document["payload"]["passed"] is True
        assert document["payload"]["tolerance"] == 1e-8
        assert document["payload"]["decimal_digits"] == 40
        assert len(document["payload"]["t_grid"]) == 4
        assert document["payload"]["rows"][0]["extracted"] == "3.141592654"
        assert list(parse_record(to_json(record, 10)).values) == SO2_VALUES[:2]

    def test_cotangent_report(self, su2, unit_params):
        """Test extraction-only rows have no exact value."""
        config = quadrature_config(su2, decimal_digits=40, depth=3)
        report = VerificationReport(desc=su2, per_k=(VerificationRow(k=0, extracted=mpf(2)),), config=config)
        record = verification_record(report, 10)
        document = json.loads(to_json(record, 10))
        assert document["payload"]["passed"] is None
        assert document["payload"]["rows"][0]["value"] is None
        assert parse_record(to_csv(record, 10)).values == (("0", None),)
