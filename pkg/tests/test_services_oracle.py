"""
Tests for the numerical oracle.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from fractions import Fraction
from unittest.mock import patch

import numpy as np
import pytest
from mpmath import mp, mpf

from app.errors import InvalidArgumentError, PrecisionExhaustedError
from app.models import EvenPolynomial, QuadratureConfig, SpectralParams
from app.services.catalog import describe
from app.services.exact_arith import mp_context
from app.services.heat import coefficient_table, evaluate_expansion
from app.services.oracle import (
    default_t0,
    density_eval,
    extract_coeffs_numeric,
    gaussian_moment_identity,
    geometric_t_grid,
    heat_identity_numeric,
    quadrature_config,
    remainder_profile,
    richardson_limit,
    verify,
)


@pytest.mark.service
class TestDensity:
    """Tests for the Plancherel density."""

    def test_values(self, so2, so3):
        """Test closed values of |C(r)|^-2."""
        assert density_eval(so2, 0) == 0
        assert float(density_eval(so3, 2)) == pytest.approx(4.0)
        assert float(density_eval(so2, 10)) == pytest.approx(math.pi * 10, rel=1e-12)

    def test_coth_limit(self, su2):
        """Test the coth case at r = 0 is its finite limit 2 C_G P(0)."""
        # P(0) = 0 for every SU(2m,1); a unit polynomial exercises the limit itself
        assert density_eval(su2, 0) == 0
        desc = replace(su2, polynomial=EvenPolynomial((Fraction(1),)))
        limit = 2 * float(desc.c_g)
        assert limit == 0.25
        assert float(density_eval(desc, 0)) == pytest.approx(limit, rel=1e-12)
        assert float(density_eval(desc, 1e-12)) == pytest.approx(limit, rel=1e-9)

    @pytest.mark.parametrize(("family", "n"), [("so", 2), ("so", 3), ("su", 3), ("su", 4), ("sp", 2), ("f4", None)])
    def test_even_and_nonnegative(self, family, n):
        """Test evenness and nonnegativity on a 1000 point symmetric grid."""
        desc = describe(family, n)
        grid = np.linspace(0.0, 25.0, 500)
        for r in grid:
            positive = density_eval(desc, r)
            assert positive == density_eval(desc, -r)
            assert positive >= 0

    def test_large_argument_clamps(self, so2):
        """Test tanh saturates without overflow at huge r."""
        with mp.workdps(30):
            assert density_eval(so2, mpf(10) ** 8) == mp.pi * mpf(10) ** 8


@pytest.mark.service
class TestIdentityTerm:
    """Tests for the quadrature of h_t(1)."""

    def test_so2_matches_expansion(self, so2, unit_params):
        """Test t = 0.01 against the three term expansion."""
        config = quadrature_config(so2, decimal_digits=40)
        value = heat_identity_numeric(so2, unit_params, 0.01, config)
        assert float(value) == pytest.approx(24.9168, abs=1e-4)
        expansion = evaluate_expansion(coefficient_table(so2, 2), unit_params, 0.01, 2)
        assert float(value) == pytest.approx(float(expansion), rel=1e-6)

    def test_so3_gaussian_moments(self, so3, unit_params, fast_config):
        """Test quadrature against the exact Gaussian moment form."""
        numeric = heat_identity_numeric(so3, unit_params, 0.1, fast_config)
        exact = gaussian_moment_identity(so3, unit_params, 0.1, dps=40)
        with mp.workdps(40):
            assert abs(numeric - exact) < mpf(10) ** -25 * abs(exact)
            closed = mpf(0.1) ** mpf(-1.5) * mp.exp(-mpf(0.1)) / (8 * mp.sqrt(mp.pi))
            assert abs(exact - closed) < mpf(10) ** -30 * closed

    def test_so5_gaussian_moments(self, unit_params):
        """Test a degree four polynomial density."""
        desc = describe("so", 5)
        config = quadrature_config(desc, decimal_digits=40)
        numeric = heat_identity_numeric(desc, unit_params, 0.03, config)
        exact = gaussian_moment_identity(desc, unit_params, 0.03, dps=40)
        with mp.workdps(40):
            assert abs(numeric - exact) < mpf(10) ** -25 * abs(exact)

    def test_scales_with_params(self, so3, fast_config):
        """Test chi(1) Vol multiplies the identity term."""
        base = heat_identity_numeric(so3, SpectralParams(), 0.2, fast_config)
        scaled = heat_identity_numeric(so3, SpectralParams(chi_dim=2, volume=3), 0.2, fast_config)
        assert float(scaled) == pytest.approx(6 * float(base), rel=1e-12)

    def test_large_t_vanishes(self, so2, unit_params, fast_config):
        """Test exp(-rho_0^2 t) domination at t = 1e6."""
        assert heat_identity_numeric(so2, unit_params, 1e6, fast_config) < fast_config.tail_epsilon

    def test_nonpositive_t(self, so2, unit_params, fast_config):
        """Test t <= 0 is rejected."""
        with pytest.raises(InvalidArgumentError):
            heat_identity_numeric(so2, unit_params, 0, fast_config)

    def test_gaussian_moments_need_polynomial_density(self, so2, unit_params):
        """Test the closed form is odd-only."""
        with pytest.raises(InvalidArgumentError):
            gaussian_moment_identity(so2, unit_params, 0.1)

    def test_quadrature_error_above_target_raises(self, so3, unit_params, fast_config):
        """Test a quadrature missing its error target reports t and the achieved error."""
        with patch.object(mp_context(), "quad", return_value=(mpf(1), mpf("0.1"))):
            with pytest.raises(PrecisionExhaustedError) as exc_info:
                heat_identity_numeric(so3, unit_params, 0.2, fast_config)
        assert exc_info.value.t == pytest.approx(0.2)
        assert exc_info.value.k is None
        assert exc_info.value.residual == pytest.approx(0.1)
        assert "t=0.2" in str(exc_info.value)

    def test_concurrent_precisions(self, so3, unit_params, fast_config):
        """Test threads integrating at 40 and 60 digits reproduce their sequential values."""
        configs = {40: fast_config, 60: quadrature_config(so3, decimal_digits=60, depth=6)}
        expected = {digits: heat_identity_numeric(so3, unit_params, 0.2, cfg) for digits, cfg in configs.items()}
        jobs = [40, 60] * 4
        with ThreadPoolExecutor(max_workers=2) as pool:
            results = list(pool.map(lambda digits: heat_identity_numeric(so3, unit_params, 0.2, configs[digits]), jobs))
        assert results == [expected[digits] for digits in jobs]
        assert expected[40] != expected[60]


@pytest.mark.unit
class TestRichardson:
    """Tests for extrapolation to t = 0."""

    def test_polynomial_is_exact(self):
        """Test a quartic is extrapolated exactly on five points."""
        ts = geometric_t_grid(0.1, 0.5, 4)
        with mp.workdps(30):
            values = [2 + 3 * mpf(t) - mpf(t) ** 2 + mpf(t) ** 4 for t in ts]
            limit, change = richardson_limit(ts, values, 4)
            assert abs(limit - 2) < mpf(10) ** -25
            assert change < mpf(10) ** -3

    def test_depth_limits_columns(self):
        """Test depth 1 only removes the linear term."""
        ts = geometric_t_grid(0.1, 0.5, 3)
        with mp.workdps(30):
            values = [1 + mpf(t) + mpf(t) ** 2 for t in ts]
            limit, _ = richardson_limit(ts, values, 1)
            # two point linear extrapolation from the last pair
            t_far, t_near = mpf(ts[-2]), mpf(ts[-1])
            assert abs(limit - (1 - t_far * t_near)) < mpf(10) ** -25

    def test_needs_two_samples(self):
        """Test too few samples are rejected."""
        with pytest.raises(InvalidArgumentError):
            richardson_limit([0.1], [1], 1)

    def test_depth_beyond_samples(self):
        """Test a depth needing more samples than given is rejected, not capped."""
        ts = geometric_t_grid(0.1, 0.5, 2)
        with pytest.raises(InvalidArgumentError):
            richardson_limit(ts, [1, 2, 3], 3)
        with pytest.raises(InvalidArgumentError):
            richardson_limit(ts, [1, 2, 3], 0)

    def test_grid(self):
        """Test the geometric grid and its guards."""
        assert geometric_t_grid(0.04, 0.5, 2) == pytest.approx((0.04, 0.02, 0.01))
        with pytest.raises(InvalidArgumentError):
            geometric_t_grid(0.04, 1.5, 2)
        with pytest.raises(InvalidArgumentError):
            geometric_t_grid(-1, 0.5, 2)

    def test_default_t0(self, so2, f4):
        """Test t0 shrinks with rho_0."""
        assert default_t0(so2) == pytest.approx(0.04)
        assert default_t0(f4) == pytest.approx(0.05 / 122)


@pytest.mark.service
class TestExtraction:
    """Tests for peeling coefficients off the identity term."""

    def test_peeling_on_exact_series(self, so2, unit_params):
        """Test peeling recovers the coefficients of a known quadratic."""
        config = quadrature_config(so2, decimal_digits=40, depth=6)

        def fake_e0(desc, params, cfg):
            return [mp.pi * (1 - mpf(t) / 3 + mpf(t) ** 2 / 15) for t in cfg.t_grid]

        with patch("app.services.oracle._scaled_e0", side_effect=fake_e0):
            coefficients = extract_coeffs_numeric(so2, unit_params, 2, config)
        assert [float(c) for c in coefficients] == pytest.approx([math.pi, -math.pi / 3, math.pi / 15], rel=1e-14)

    def test_precision_exhausted(self, so2, unit_params):
        """Test a diverging residual names the failing k."""
        config = quadrature_config(so2, decimal_digits=40, depth=4)
        with patch("app.services.oracle._scaled_e0", return_value=[mpf(1)] * 5):
            with patch("app.services.oracle.richardson_limit", return_value=(mpf(1), mpf("0.5"))):
                with pytest.raises(PrecisionExhaustedError) as exc_info:
                    extract_coeffs_numeric(so2, unit_params, 2, config)
        assert exc_info.value.k == 0

    def test_bad_arguments(self, so2, unit_params):
        """Test k_max and grid guards."""
        config = quadrature_config(so2, decimal_digits=40)
        with pytest.raises(InvalidArgumentError):
            extract_coeffs_numeric(so2, unit_params, -1, config)
        with pytest.raises(InvalidArgumentError):
            extract_coeffs_numeric(so2, unit_params, 1, QuadratureConfig(t_grid=(2.0, 1.0)))

    def test_depth_must_fit_grid(self):
        """Test richardson_depth > len(t_grid) - 1 is rejected."""
        with pytest.raises(InvalidArgumentError):
            QuadratureConfig(t_grid=(0.04, 0.02, 0.01), richardson_depth=3)
        assert QuadratureConfig(t_grid=(0.04, 0.02, 0.01), richardson_depth=2).richardson_depth == 2

    def test_so3_fast(self, so3, unit_params, fast_config):
        """Test A_0 = pi and A_1 = -pi for SO_1(3,1)."""
        coefficients = extract_coeffs_numeric(so3, unit_params, 1, fast_config)
        assert float(coefficients[0]) == pytest.approx(math.pi, rel=1e-10)
        assert float(coefficients[1]) == pytest.approx(-math.pi, rel=1e-8)


@pytest.mark.service
@pytest.mark.slow
class TestVerification:
    """End-to-end comparisons of exact and extracted coefficients."""

    @pytest.mark.parametrize(("family", "n"), [("so", 2), ("so", 3), ("so", 4), ("so", 5), ("su", 3)])
    def test_sixty_digits(self, family, n, unit_params, oracle_config):
        """Test k <= 3 at tolerance 1e-8."""
        desc = describe(family, n)
        report = verify(desc, unit_params, 3, 1e-8, oracle_config(desc, 60))
        assert report.passed is True, [(row.k, row.rel_error) for row in report.per_k]
        assert report.failing == []

    @pytest.mark.parametrize(("family", "n"), [("sp", 2), ("f4", None)])
    def test_eighty_digits(self, family, n, unit_params, oracle_config):
        """Test k <= 2 at tolerance 1e-6."""
        desc = describe(family, n)
        report = verify(desc, unit_params, 2, 1e-6, oracle_config(desc, 80))
        assert report.passed is True

    def test_so2_values(self, so2, unit_params, oracle_config):
        """Test the extracted values themselves."""
        extracted = extract_coeffs_numeric(so2, unit_params, 2, oracle_config(so2, 60))
        assert [float(c) for c in extracted] == pytest.approx([3.14159265, -1.04719755, 0.20943951], rel=1e-8)

    def test_so4_values(self, so4, unit_params, oracle_config):
        """Test A = [pi^2/4, -pi^2/2]."""
        extracted = extract_coeffs_numeric(so4, unit_params, 1, oracle_config(so4, 60))
        assert [float(c) for c in extracted] == pytest.approx([2.46740110, -4.93480220], rel=1e-8)

    def test_cotangent_extraction_only(self, su2, unit_params, oracle_config):
        """Test SU(2,1) yields extracted values without pass/fail."""
        report = verify(su2, unit_params, 2, 1e-8, oracle_config(su2, 60))
        assert report.passed is None
        assert report.tolerance is None
        assert all(row.exact is None and row.passed is None for row in report.per_k)
        assert len(report.per_k) == 3

    def test_scaled_verification(self, so3, oracle_config):
        """Test chi(1) Vol flows through both sides."""
        params = SpectralParams(chi_dim=2, volume="1/3")
        report = verify(so3, params, 1, 1e-8, oracle_config(so3, 60))
        assert report.passed is True
        assert float(report.per_k[0].extracted) == pytest.approx(2 * math.pi / 3, rel=1e-8)

    def test_doubling_digits_does_not_degrade(self, so4, unit_params, oracle_config):
        """Test 80 digits is never worse than 40 beyond the tolerance, k <= 3."""
        tolerance = 1e-8
        coarse = verify(so4, unit_params, 3, tolerance, oracle_config(so4, 40))
        fine = verify(so4, unit_params, 3, tolerance, oracle_config(so4, 80))
        for low, high in zip(coarse.per_k, fine.per_k, strict=True):
            assert high.rel_error <= low.rel_error + tolerance, (high.k, low.rel_error, high.rel_error)
        assert fine.passed is True

    def test_remainder_profile(self, so2, unit_params):
        """Test the N = 2 remainder ratio varies by less than a factor 2."""
        config = quadrature_config(so2, decimal_digits=60)
        table = coefficient_table(so2, 2)
        ratios = remainder_profile(table, unit_params, 2, [1e-2, 5e-3, 2.5e-3], config)
        assert ratios.shape == (3,)
        assert ratios.max() / ratios.min() < 2
        # bounded by |A_3| = 4 pi / 315 to first order
        assert ratios[-1] == pytest.approx(4 * math.pi / 315, rel=1e-2)
