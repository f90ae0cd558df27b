"""Exponent catalog, characteristic functional, and index estimation."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levybesov import (
    GridSpec,
    IndexPair,
    LevyMeasure,
    QuadratureError,
    UnsupportedMeasureError,
    char_functional,
    compound_poisson,
    custom_triplet,
    drift,
    estimate_indices,
    gaussian,
    grid_function,
    indices_from_measure,
    inverse_gaussian,
    jump_gaussian,
    laplace,
    make_index_pair_measure,
    poisson,
    sas,
    sum_sas,
    sym_gamma,
)

CATALOG = [
    gaussian(1.0),
    drift(0.7),
    sas(0.7),
    sas(1.5),
    sum_sas(0.5, 1.5),
    laplace(),
    sym_gamma(2.5),
    poisson(1.3),
    compound_poisson(1.0, jump_gaussian()),
    inverse_gaussian(),
]


class TestExponent:
    def test_gaussian_closed_form(self):
        assert gaussian(1.0).exponent(2.0) == pytest.approx(-2.0, abs=1e-14)

    def test_cauchy_closed_form(self):
        assert sas(1.0).exponent(3.0) == pytest.approx(-3.0, abs=1e-14)

    def test_vanishes_at_zero(self):
        for model in CATALOG:
            assert model.exponent(0.0) == 0.0, model.tag

    def test_conjugate_symmetry(self):
        rng = np.random.default_rng(3)
        xi = rng.uniform(-50.0, 50.0, 64)
        for model in CATALOG:
            left = model.exponent(-xi)
            right = np.conj(model.exponent(xi))
            assert np.max(np.abs(left - right)) < 1e-12, model.tag

    def test_symmetric_families_real_nonpositive(self):
        xi = np.linspace(-20, 20, 101)
        for model in CATALOG:
            if model.is_symmetric:
                f = model.exponent(xi)
                assert np.max(np.abs(f.imag)) == 0.0
                assert np.all(f.real <= 0.0)

    def test_inverse_gaussian_against_sqrt(self):
        # away from the series switchover the closed form is direct
        xi = np.array([0.01, 0.5, 3.0, 200.0])
        expect = 1.0 - np.sqrt(1.0 - 2j * xi)
        assert np.max(np.abs(inverse_gaussian().exponent(xi) - expect)) < 1e-12

    def test_inverse_gaussian_series_matches_closed_form(self):
        # crossing the small-|xi| branch: compare orders on both sides
        f = inverse_gaussian().exponent
        for xi in (4.9e-4, 5.1e-4):
            direct = 1.0 - np.sqrt(1.0 - 2j * xi)
            assert abs(f(xi) - direct) < 1e-15


class TestCustomTriplet:
    def test_cauchy_measure_reproduces_stable_exponent(self):
        # nu(dx) = |x|^-2 dx gives f(xi) = -pi |xi|: the half-line integral
        # 2 * int_0^inf (1 - cos u) / u^2 du = pi is the classical value.
        nu = LevyMeasure(density=lambda x: np.abs(x) ** -2.0,
                         inner_cutoff=1e-10, outer_cutoff=1e10)
        model = custom_triplet(0.0, 0.0, nu)
        for xi in (0.5, 1.0, 2.0):
            val = model.exponent(xi)
            assert val.imag == 0.0
            assert val.real == pytest.approx(-math.pi * xi, rel=1e-7)

    def test_drift_and_gaussian_parts(self):
        nu = LevyMeasure(density=lambda x: np.zeros_like(np.asarray(x, dtype=float)))
        model = custom_triplet(0.25, 2.0, nu)
        val = model.exponent(3.0)
        assert val == pytest.approx(0.25j * 3.0 - 0.5 * 2.0 * 9.0, abs=1e-12)

    def test_quadrature_failure_carries_partial(self):
        # wildly oscillatory non-integrable density: quad cannot settle
        def density(x):
            x = np.asarray(x, dtype=float)
            return (2.0 + np.sin(1e7 / np.maximum(np.abs(x), 1e-30))) / np.abs(x) ** 3
        nu = LevyMeasure(density=density, inner_cutoff=1e-12, outer_cutoff=1e2)
        model = custom_triplet(0.0, 0.0, nu)
        with pytest.raises(QuadratureError) as err:
            model.exponent(1.0)
        assert err.value.partial is not None


class TestCharFunctional:
    def test_gaussian_unit_energy(self):
        spec = GridSpec(d=1, J=4, L=0.5)
        phi = np.ones(spec.shape)  # ||phi||_2^2 = box volume = 1
        val = char_functional(gaussian(1.0), phi, spec.cell_volume, 1.0)
        assert val == pytest.approx(math.exp(-0.5), rel=1e-12)

    def test_zero_test_function(self):
        spec = GridSpec(d=1, J=3, L=0.5)
        phi = np.zeros(spec.shape)
        for model in CATALOG:
            assert char_functional(model, phi, spec.cell_volume, 2.0) == 1.0

    def test_sas_indicator(self):
        # phi = 1_[0,1): int |2 phi|^1.5 = 2^1.5, so CF(2) = exp(-2^1.5)
        spec = GridSpec(d=1, J=4, L=1.0)
        phi = grid_function(spec, lambda x: ((x >= 0) & (x < 1)).astype(float))
        val = char_functional(sas(1.5), phi, spec.cell_volume, 2.0)
        assert val == pytest.approx(math.exp(-(2.0**1.5)), rel=1e-12)

    def test_multidimensional_riemann_sum(self):
        spec = GridSpec(d=2, J=3, L=0.5)
        phi = grid_function(spec, lambda x, y: np.exp(-(x**2) - y**2))
        got = char_functional(gaussian(2.0), phi, spec.cell_volume, 1.5)
        expect = math.exp(-0.5 * 2.0 * 1.5**2 * float(np.sum(phi**2)) * spec.cell_volume)
        assert got == pytest.approx(expect, rel=1e-12)


class TestEstimateIndices:
    @pytest.mark.parametrize("model,expected", [
        (laplace(), (2.0, 0.0)),
        (sum_sas(0.5, 1.5), (0.5, 1.5)),
        (sas(0.7), (0.7, 0.7)),
    ])
    def test_spec_rows(self, model, expected):
        est = estimate_indices(model)
        assert est.value.beta0 == pytest.approx(expected[0], abs=0.05)
        assert est.value.beta_inf == pytest.approx(expected[1], abs=0.05)

    def test_cap_flag(self):
        est = estimate_indices(gaussian(2.0))
        assert est.beta0_capped
        assert est.value.beta0 == 2.0

    def test_curves_attached(self):
        est = estimate_indices(sas(1.2))
        assert est.curves["p"].shape == est.curves["stat_zero"].shape
        assert est.curves["p"].shape == est.curves["stat_inf"].shape

    def test_zero_exponent_reports_caps(self):
        est = estimate_indices(drift(0.0))
        assert (est.value.beta0, est.value.beta_inf) == (2.0, 0.0)


class TestIndicesFromMeasure:
    def test_pair_measure(self):
        est = indices_from_measure(make_index_pair_measure(1.0, 0.5))
        assert est.value.beta0 == pytest.approx(1.0, abs=0.05)
        assert est.value.beta_inf == pytest.approx(0.5, abs=0.05)

    def test_zero_measure(self):
        nu = LevyMeasure(density=lambda x: np.zeros_like(np.asarray(x, dtype=float)))
        est = indices_from_measure(nu)
        assert est.value.beta0 == 2.0
        assert est.value.beta_inf == 0.0

    def test_bounded_support_measure(self):
        # all moments finite on both sides: (cap, 0)
        def density(x):
            ax = np.abs(np.asarray(x, dtype=float))
            return ((ax > 1.0) & (ax <= 2.0)).astype(float)
        est = indices_from_measure(LevyMeasure(density=density))
        assert est.value.beta0 == 2.0
        assert est.value.beta_inf == 0.0

    def test_asymmetric_rejected(self):
        nu = LevyMeasure(density=lambda x: np.exp(-np.abs(x)), symmetric=False)
        with pytest.raises(UnsupportedMeasureError):
            indices_from_measure(nu)

    def test_levy_validity_check(self):
        good = make_index_pair_measure(0.5, 1.5)
        assert good.check_levy() > 0
        bad = LevyMeasure(density=lambda x: np.abs(x) ** -4.0)
        with pytest.raises(UnsupportedMeasureError):
            bad.check_levy()


class TestIndexPairRoundTrip:
    @pytest.mark.parametrize("beta0,beta_inf", [
        (1.0, 0.5), (0.0, 2.0), (2.0, 0.0), (0.5, 1.0),
    ])
    def test_round_trip_subset(self, beta0, beta_inf):
        est = indices_from_measure(make_index_pair_measure(beta0, beta_inf))
        assert est.value.beta0 == pytest.approx(beta0, abs=0.05)
        assert est.value.beta_inf == pytest.approx(beta_inf, abs=0.05)

    def test_power_densities_match_spec_form(self):
        nu = make_index_pair_measure(1.0, 0.5)
        assert nu.density(2.0) == pytest.approx(2.0**-2.0)
        assert nu.density(0.5) == pytest.approx(0.5**-1.5)

    def test_endpoint_log_corrections(self):
        nu = make_index_pair_measure(0.0, 2.0)
        assert nu.density(3.0) == pytest.approx(math.log1p(3.0) ** -2 / 3.0)
        assert nu.density(0.25) == pytest.approx(
            math.log1p(4.0) ** -2 * 0.25**-3.0)
        nu.check_levy()  # must be a genuine Levy measure


class TestRatioBoundedness:
    # |f| <= C (|xi|^b0 + |xi|^bi) integrated against a fixed test function:
    # the ratio must stay bounded across six orders of dilation.
    PROBES = [
        (gaussian(1.0), 2.0, 2.0),
        (drift(0.7), 1.0, 1.0),
        (sas(0.7), 0.7, 0.7),
        (sum_sas(0.5, 1.5), 0.5, 1.5),
        (laplace(), 2.0, 0.1),
        (sym_gamma(2.5), 2.0, 0.1),
        (poisson(1.3), 1.0, 0.1),
        (compound_poisson(1.0, jump_gaussian()), 2.0, 0.1),
        (inverse_gaussian(), 1.0, 0.5),
    ]

    @staticmethod
    def _pseudo_norm(phi, vol, beta):
        if beta == 0.0:
            return float(np.count_nonzero(phi)) * vol
        return float(np.sum(np.abs(phi) ** beta)) * vol

    def test_ratio_bounded(self):
        # boundedness on a finite grid shows up as non-growth toward the
        # dilation extremes (a wrong exponent pair gives power-law growth
        # at one end)
        spec = GridSpec(d=1, J=6, L=0.5)
        phi = grid_function(spec, lambda x: np.exp(-40.0 * x**2))
        vol = spec.cell_volume
        ts = np.logspace(-6, 6, 25)
        for model, b0, bi in self.PROBES:
            ratios = []
            for t in ts:
                num = float(np.sum(np.abs(model.exponent(t * phi.ravel())))) * vol
                den = (t**b0 * self._pseudo_norm(phi, vol, b0)
                       + t**bi * self._pseudo_norm(phi, vol, bi))
                ratios.append(num / den)
            r = np.asarray(ratios)
            assert np.all(np.isfinite(r)), model.tag
            assert r[0] <= 1.5 * r[2] + 1e-12, model.tag
            assert r[-1] <= 1.5 * r[-3] + 1e-12, model.tag

    def test_ratio_grows_for_inadmissible_exponent(self):
        # both exponents below the true index at infinity: sas(0.7) against
        # the pair (0.5, 0.5) gives num/den ~ t^0.2 at large dilation
        spec = GridSpec(d=1, J=6, L=0.5)
        phi = grid_function(spec, lambda x: np.exp(-40.0 * x**2))
        vol = spec.cell_volume
        model = sas(0.7)
        ratios = []
        for t in np.logspace(-6, 6, 25):
            num = float(np.sum(np.abs(model.exponent(t * phi.ravel())))) * vol
            den = 2.0 * t**0.5 * self._pseudo_norm(phi, vol, 0.5)
            ratios.append(num / den)
        assert ratios[-1] > 1.5 * ratios[-3]


class TestIndexPairValidation:
    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            IndexPair(2.5, 0.0)
        with pytest.raises(ValueError):
            IndexPair(1.0, -0.1)


@settings(max_examples=40, deadline=None)
@given(xi=st.floats(min_value=-100.0, max_value=100.0,
                    allow_nan=False, allow_infinity=False),
       alpha=st.floats(min_value=0.1, max_value=1.9))
def test_conjugate_symmetry_property(xi, alpha):
    model = sas(alpha)
    assert abs(model.exponent(-xi) - np.conj(model.exponent(xi))) < 1e-12
