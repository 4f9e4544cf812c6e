"""Modulus computations: closed forms, flat sets, conjugate intervals, fits."""
import math

import numpy as np
import pytest

from convexbench import (
    Absolute,
    AsymmetricPower,
    DataError,
    GrowthProfile,
    ModulusCurve,
    ModulusSample,
    PiecewiseLinear,
    SlopeRangeError,
    SymmetricPower,
    Tilt,
    UnsupportedSpecError,
    big_H,
    build_function,
    conjugate_subdifferential,
    fit_growth_exponent,
    flat_set,
    modulus_analytic,
    modulus_bounds_from_growth,
    modulus_numeric,
    sample_modulus_curve,
)
from convexbench.functions import subgrad_spec

D11 = (-1.0, 1.0)


class TestModulusAnalytic:
    def test_quadratic(self):
        assert modulus_analytic(SymmetricPower(k=2.0), 0.01, D11) == 0.01

    def test_asymmetric_uses_flatter_side(self):
        # eps^(1/(3-1)) = sqrt(0.01) = 0.1
        w = modulus_analytic(AsymmetricPower(1.5, 3.0), 0.01, D11)
        assert w == pytest.approx(0.1, rel=1e-15)

    def test_cubic(self):
        assert modulus_analytic(SymmetricPower(k=3.0), 0.04, D11) == pytest.approx(
            0.2, rel=1e-15
        )

    def test_capped_at_farther_endpoint(self):
        w = modulus_analytic(SymmetricPower(k=2.0, x_star=0.5), 10.0, D11)
        assert w == 1.5

    def test_unsupported_variants(self):
        for spec in (Absolute(), Tilt(SymmetricPower(k=2.0), 0.1),
                     PiecewiseLinear((0.0,), (-1.0, 1.0))):
            with pytest.raises(UnsupportedSpecError):
                modulus_analytic(spec, 0.01, D11)

    def test_rejects_bad_epsilon(self):
        with pytest.raises(ValueError):
            modulus_analytic(SymmetricPower(k=2.0), 0.0, D11)


class TestModulusNumeric:
    def test_absolute_flat_set_is_minimizer(self):
        f = build_function(Absolute(0.0), D11)
        assert modulus_numeric(f, 0.5) <= 1e-11

    def test_matches_analytic_for_quadratic(self):
        f = build_function(SymmetricPower(k=2.0), D11)
        w = modulus_numeric(f, 0.01, tol=1e-12)
        assert abs(w - 0.01) <= 1e-10
        # independent check: dense scan of the subgradient magnitude
        xs = np.linspace(-1, 1, 2_000_001)
        inside = xs[np.abs(subgrad_spec(f.spec, xs)) < 0.01]
        assert abs(max(abs(inside[0]), abs(inside[-1])) - w) < 1e-5

    def test_flat_set_capped_at_domain(self):
        f = build_function(SymmetricPower(k=2.0), D11)
        assert modulus_numeric(f, 2.0) == 1.0

    def test_rejects_bad_epsilon(self):
        f = build_function(SymmetricPower(k=2.0), D11)
        with pytest.raises(ValueError):
            modulus_numeric(f, -0.1)
        with pytest.raises(ValueError):
            modulus_numeric(f, 0.01, tol=0.0)

    def test_agreement_with_analytic_on_log_grid(self):
        specs = [SymmetricPower(k=1.5), SymmetricPower(k=2.0), SymmetricPower(k=3.0),
                 AsymmetricPower(1.5, 2.0), AsymmetricPower(1.5, 3.0),
                 AsymmetricPower(2.0, 3.0)]
        for spec in specs:
            f = build_function(spec, D11)
            for eps in np.geomspace(1e-6, 1e-1, 20):
                wa = modulus_analytic(spec, float(eps), D11)
                wn = modulus_numeric(f, float(eps))
                assert abs(wa - wn) <= 1e-6

    def test_monotone_in_epsilon(self):
        f = build_function(AsymmetricPower(1.5, 3.0, x_star=0.2), (-2.0, 2.0))
        ws = [modulus_numeric(f, float(e)) for e in np.geomspace(1e-5, 1.0, 25)]
        assert all(w2 >= w1 - 1e-12 for w1, w2 in zip(ws, ws[1:]))


class TestConjugateSubdifferential:
    def test_quadratic_slope_inverse(self):
        f = build_function(SymmetricPower(k=2.0), D11)
        lo, hi = conjugate_subdifferential(f, 0.3)
        assert lo == pytest.approx(0.3, abs=1e-11)
        assert hi == pytest.approx(0.3, abs=1e-11)

    def test_absolute_kink_absorbs_intermediate_slopes(self):
        f = build_function(Absolute(0.0), D11)
        lo, hi = conjugate_subdifferential(f, 0.5)
        assert abs(lo) <= 1e-11 and abs(hi) <= 1e-11

    def test_cubic_negative_slope(self):
        f = build_function(SymmetricPower(k=3.0), D11)
        lo, hi = conjugate_subdifferential(f, -0.04)
        assert lo == pytest.approx(-0.2, abs=1e-9)
        # verified by substitution back through the subgradient
        assert subgrad_spec(f.spec, lo) == pytest.approx(-0.04, abs=1e-10)

    def test_zero_slope_recovers_minimizer_set(self):
        f = build_function(
            PiecewiseLinear(breakpoints=(-0.25, 0.5), slopes=(-1.0, 0.0, 2.0)),
            D11,
        )
        lo, hi = conjugate_subdifferential(f, 0.0)
        assert lo == pytest.approx(-0.25, abs=1e-11)
        assert hi == pytest.approx(0.5, abs=1e-11)

    def test_range_error(self):
        f = build_function(SymmetricPower(k=2.0), D11)
        with pytest.raises(SlopeRangeError):
            conjugate_subdifferential(f, 2.0)
        with pytest.raises(SlopeRangeError):
            conjugate_subdifferential(f, -1.0000001)

    def test_boundary_level_sets(self):
        f = build_function(Absolute(0.0), D11)
        lo, hi = conjugate_subdifferential(f, 1.0)
        assert lo == pytest.approx(0.0, abs=1e-11)
        assert hi == 1.0


class TestFlatSet:
    def test_flat_set_interval(self):
        f = build_function(SymmetricPower(k=2.0), D11)
        lo, hi = flat_set(f, 0.25)
        assert lo == pytest.approx(-0.25, abs=1e-11)
        assert hi == pytest.approx(0.25, abs=1e-11)

    def test_clamps_to_domain(self):
        f = build_function(SymmetricPower(k=2.0, x_star=0.5), D11)
        lo, hi = flat_set(f, 3.0)
        assert (lo, hi) == (-1.0, 1.0)


class TestBigH:
    def test_quadratic(self):
        f = build_function(SymmetricPower(k=2.0), D11)
        assert big_H(f, 0.01) == pytest.approx(0.01, abs=1e-10)

    def test_absolute_is_zero(self):
        f = build_function(Absolute(0.0), D11)
        assert big_H(f, 0.5) <= 1e-10

    def test_asymmetric_dominated_by_flat_side(self):
        f = build_function(AsymmetricPower(1.5, 3.0), D11)
        assert big_H(f, 0.01) == pytest.approx(0.1, abs=1e-9)

    def test_H_below_modulus(self):
        for spec in (SymmetricPower(k=2.0), SymmetricPower(k=3.0),
                     AsymmetricPower(1.5, 3.0), Absolute(0.1),
                     PiecewiseLinear((-0.3, 0.4), (-1.0, 0.0, 1.0))):
            f = build_function(spec, D11)
            for eps in (1e-4, 1e-3, 1e-2, 0.05):
                assert big_H(f, eps) <= modulus_numeric(f, eps) + 1e-9

    def test_H_equals_modulus_for_strictly_convex(self):
        for spec in (SymmetricPower(k=1.5), SymmetricPower(k=2.0),
                     AsymmetricPower(2.0, 3.0)):
            f = build_function(spec, D11)
            for eps in (1e-4, 1e-2):
                assert big_H(f, eps) == pytest.approx(
                    modulus_numeric(f, eps), abs=1e-9
                )


class TestGrowthBounds:
    def test_half_quadratic_example(self):
        profile = GrowthProfile(k_l=2.0, k_r=2.0, lambda_l=0.5, lambda_r=0.5)
        lo, hi = modulus_bounds_from_growth(profile, 0.01, C=2.0)
        assert lo == pytest.approx(0.005, rel=1e-12)
        assert hi == pytest.approx(0.04, rel=1e-12)

    def test_cubic_example(self):
        profile = GrowthProfile(k_l=3.0, k_r=3.0, lambda_l=1 / 3, lambda_r=1 / 3)
        lo, hi = modulus_bounds_from_growth(profile, 1e-4, C=2.0)
        assert lo == pytest.approx(math.sqrt(5e-5), rel=1e-12)
        assert hi == pytest.approx(math.sqrt(6e-4), rel=1e-12)
        # the sandwich contains the numeric modulus
        f = build_function(SymmetricPower(k=3.0), D11)
        assert lo <= modulus_numeric(f, 1e-4) <= hi

    def test_strict_ordering(self):
        profile = GrowthProfile(k_l=1.7, k_r=2.4, lambda_l=0.9, lambda_r=0.3)
        lo, hi = modulus_bounds_from_growth(profile, 0.03, C=1.0 + 1e-9)
        assert lo < hi

    def test_lambda_case_table(self):
        # flatter side wins the exponent; its lambda is used
        p = GrowthProfile(k_l=3.0, k_r=2.0, lambda_l=0.25, lambda_r=9.0)
        lo, hi = modulus_bounds_from_growth(p, 1e-3, C=2.0)
        assert lo == pytest.approx((1e-3 / (2 * 0.25 * 3)) ** 0.5, rel=1e-12)
        assert hi == pytest.approx((2 * 1e-3 / 0.25) ** 0.5, rel=1e-12)

    def test_rejects_bad_arguments(self):
        p = GrowthProfile(2.0, 2.0, 0.5, 0.5)
        with pytest.raises(ValueError):
            modulus_bounds_from_growth(p, 0.01, C=1.0)
        with pytest.raises(ValueError):
            modulus_bounds_from_growth(p, 0.0, C=2.0)

    def test_sandwich_on_catalog(self):
        for spec in (SymmetricPower(k=1.5), SymmetricPower(k=2.0),
                     SymmetricPower(k=3.0), AsymmetricPower(1.5, 3.0),
                     AsymmetricPower(2.0, 3.0)):
            f = build_function(spec, D11)
            assert f.growth is not None
            for eps in np.geomspace(1e-6, 1e-3, 10):
                lo, hi = modulus_bounds_from_growth(f.growth, float(eps), C=2.0)
                w = modulus_numeric(f, float(eps))
                assert lo <= w <= hi


class TestFitGrowthExponent:
    def _curve_from_analytic(self, spec, eps_grid):
        samples = tuple(
            ModulusSample(float(e), modulus_analytic(spec, float(e), D11), "analytic")
            for e in eps_grid
        )
        return ModulusCurve(samples)

    def test_cubic_alpha_half(self):
        curve = self._curve_from_analytic(
            SymmetricPower(k=3.0), np.geomspace(1e-4, 1e-2, 12)
        )
        assert fit_growth_exponent(curve) == pytest.approx(0.5, abs=1e-9)

    def test_quadratic_alpha_one(self):
        curve = self._curve_from_analytic(
            SymmetricPower(k=2.0), np.geomspace(1e-4, 1e-2, 12)
        )
        assert fit_growth_exponent(curve) == pytest.approx(1.0, abs=1e-9)

    def test_all_zero_omegas_rejected(self):
        curve = ModulusCurve(
            tuple(ModulusSample(e, 0.0, "numeric") for e in (1e-3, 1e-2, 1e-1))
        )
        with pytest.raises(DataError):
            fit_growth_exponent(curve)

    def test_too_few_samples_rejected(self):
        curve = ModulusCurve(
            (ModulusSample(1e-3, 1e-3, "numeric"), ModulusSample(1e-2, 1e-2, "numeric"))
        )
        with pytest.raises(DataError):
            fit_growth_exponent(curve)


class TestSampleModulusCurve:
    def test_curve_is_monotone_and_tagged(self):
        f = build_function(SymmetricPower(k=2.0), D11)
        curve = sample_modulus_curve(f, np.geomspace(1e-4, 1e-1, 8))
        methods = {s.method for s in curve.samples}
        assert methods == {"analytic", "numeric"}
        numeric = [s for s in curve.samples if s.method == "numeric"]
        assert all(
            s2.omega >= s1.omega - 1e-12 for s1, s2 in zip(numeric, numeric[1:])
        )
        assert curve.fitted_alpha == pytest.approx(1.0, abs=1e-6)
        domain_diameter = 2.0
        assert all(s.omega <= domain_diameter for s in curve.samples)

    def test_unsupported_spec_yields_numeric_only(self):
        f = build_function(Absolute(0.0), D11)
        curve = sample_modulus_curve(f, (0.1, 0.5, 0.9))
        assert {s.method for s in curve.samples} == {"numeric"}
        assert curve.fitted_alpha is None  # all omegas are zero


class TestTiltConjugateIdentity:
    def test_tilt_argmin_matches_conjugate_at_minus_eps(self):
        rng = np.random.default_rng(7)
        for _ in range(25):
            k = rng.uniform(1.4, 3.5)
            x0 = rng.uniform(-0.5, 0.5)
            eps = 10 ** rng.uniform(-5, -2)
            f = build_function(SymmetricPower(k=k, x_star=x0), (-2.0, 2.0))
            g = build_function(Tilt(f.spec, eps), (-2.0, 2.0))
            lo, hi = conjugate_subdifferential(f, -eps)
            gl, gr = g.minimizer_set
            # the tilted minimizer (known in closed form) equals the conjugate
            # subdifferential of the base at -eps
            assert gl == pytest.approx(lo, abs=1e-9)
            assert gr == pytest.approx(hi, abs=1e-9)
