"""Field sampling: laws, reproducibility, pairing, point clouds."""

import math

import numpy as np
import pytest
from scipy.stats import ks_2samp

from levybesov import (
    GridSpec,
    UnsupportedSamplerError,
    bin_points,
    char_functional,
    compound_poisson,
    custom_triplet,
    drift,
    gaussian,
    grid_function,
    jump_gaussian,
    laplace,
    make_index_pair_measure,
    pair,
    poisson,
    sample_compound_poisson_points,
    sample_field,
    sas,
    truncation_model,
)
from levybesov.sampler import draw_increments, sample_cell, stream


class TestCellDraws:
    def test_gaussian_volume_scaling(self):
        # CF exp(-4 xi^2 / 2) is N(0, 4)
        rng = stream(11, "test")
        x = draw_increments(gaussian(1.0), 4.0, rng, 1_000_000)
        assert x.var() == pytest.approx(4.0, rel=0.01)

    def test_zero_volume(self):
        rng = stream(1, "test")
        for model in (gaussian(1.0), sas(1.2), laplace(), poisson(2.0)):
            assert sample_cell(model, 0.0, rng) == 0.0

    def test_cauchy_scale(self):
        # exponent 2 * (-|xi|): Cauchy scale 2, median |X| = 2 tan(pi/4) = 2
        rng = stream(5, "test")
        x = draw_increments(sas(1.0), 2.0, rng, 400_000)
        assert np.median(np.abs(x)) == pytest.approx(2.0, rel=0.02)

    def test_laplace_unit_volume_variance(self):
        # Laplace density e^-|x|/2 has variance 2
        rng = stream(9, "test")
        x = draw_increments(laplace(), 1.0, rng, 400_000)
        assert x.var() == pytest.approx(2.0, rel=0.03)

    def test_inverse_gaussian_moments(self):
        # IG(mean=v, shape=v^2): mean v, variance mean^3/shape = v
        rng = stream(2, "test")
        v = 0.25
        x = draw_increments(
            __import__("levybesov").inverse_gaussian(), v, rng, 400_000)
        assert x.mean() == pytest.approx(v, rel=0.02)
        assert x.var() == pytest.approx(v, rel=0.03)

    def test_custom_triplet_unsupported(self):
        nu = make_index_pair_measure(1.0, 0.5)
        rng = stream(1, "test")
        with pytest.raises(UnsupportedSamplerError):
            sample_cell(custom_triplet(0.0, 0.0, nu), 1.0, rng)


class TestSampleField:
    def test_gaussian_field_variance(self):
        spec = GridSpec(d=1, J=8, L=1.0)
        field = sample_field(gaussian(1.0), spec, seed=42)
        assert field.values.shape == (512,)
        assert field.values.var() == pytest.approx(2.0**-8, rel=0.05)

    def test_poisson_cells_integer(self):
        spec = GridSpec(d=1, J=0, L=1.0)
        field = sample_field(poisson(1.0), spec, seed=3)
        assert np.all(field.values == np.floor(field.values))

    def test_thread_count_invariance(self):
        spec = GridSpec(d=1, J=15, L=1.0)  # spans several blocks
        model = sas(1.5)
        a = sample_field(model, spec, seed=7, workers=1)
        b = sample_field(model, spec, seed=7, workers=8)
        assert np.array_equal(a.values, b.values)

    def test_seed_sensitivity(self):
        spec = GridSpec(d=1, J=6)
        a = sample_field(gaussian(1.0), spec, seed=1)
        b = sample_field(gaussian(1.0), spec, seed=2)
        assert not np.array_equal(a.values, b.values)

    def test_multidimensional_shape(self):
        spec = GridSpec(d=2, J=4, L=0.5)
        field = sample_field(laplace(), spec, seed=5)
        assert field.values.shape == (16, 16)


class TestPointCloud:
    def test_mean_count(self):
        # box [-1, 1), rate 1: counts ~ Poisson(2)
        spec = GridSpec(d=1, J=3, L=1.0)
        jump = jump_gaussian()
        counts = [len(sample_compound_poisson_points(1.0, jump, spec, s).points)
                  for s in range(10_000)]
        assert np.mean(counts) == pytest.approx(2.0, rel=0.03)

    def test_vanishing_intensity_gives_empty_cloud(self):
        spec = GridSpec(d=1, J=2, L=0.5)
        cloud = sample_compound_poisson_points(1e-300, jump_gaussian(), spec, 1)
        assert len(cloud.points) == 0
        assert bin_points(cloud).values.sum() == 0.0

    def test_binned_cloud_matches_field_distribution(self):
        spec = GridSpec(d=1, J=3, L=0.5)
        jump = jump_gaussian()
        model = compound_poisson(2.0, jump)
        a = np.concatenate([
            sample_field(model, spec, seed=s).values for s in range(1250)])
        b = np.concatenate([
            bin_points(sample_compound_poisson_points(2.0, jump, spec, s)).values
            for s in range(1250)])
        assert ks_2samp(a, b).pvalue > 0.01


class TestPair:
    def test_constant_test_function_variance(self):
        # <w, 1_box> ~ N(0, sigma^2 |box|)
        spec = GridSpec(d=1, J=4, L=1.0)
        phi = np.ones(spec.shape)
        vals = [pair(sample_field(gaussian(3.0), spec, seed=s), phi)
                for s in range(20_000)]
        assert np.var(vals) == pytest.approx(3.0 * 2.0, rel=0.05)

    def test_zero_test_function(self):
        spec = GridSpec(d=1, J=3)
        field = sample_field(laplace(), spec, seed=1)
        assert pair(field, np.zeros(spec.shape)) == 0.0

    def test_disjoint_supports_uncorrelated(self):
        spec = GridSpec(d=1, J=3, L=0.5)
        phi = np.zeros(8)
        psi = np.zeros(8)
        phi[:4] = 1.0
        psi[4:] = 1.0
        xs = np.empty(100_000)
        ys = np.empty(100_000)
        for s in range(100_000):
            f = sample_field(gaussian(1.0), spec, seed=s)
            xs[s] = pair(f, phi)
            ys[s] = pair(f, psi)
        r = np.corrcoef(xs, ys)[0, 1]
        assert abs(r) < 0.01

    def test_shape_mismatch(self):
        spec = GridSpec(d=1, J=3)
        field = sample_field(gaussian(1.0), spec, seed=1)
        with pytest.raises(Exception):
            pair(field, np.ones(4))


class TestStationarity:
    def test_haar_pairings_shift_invariant(self):
        # discrete analogue of shift invariance: pair with the same wavelet
        # at two shifts, compare distributions
        spec = GridSpec(d=1, J=3, L=0.5)
        psi0 = np.zeros(8)
        psi1 = np.zeros(8)
        psi0[0:2] = (1.0, -1.0)
        psi1[4:6] = (1.0, -1.0)
        a = np.empty(10_000)
        b = np.empty(10_000)
        for s in range(10_000):
            f = sample_field(laplace(), spec, seed=s)
            a[s] = pair(f, psi0)
            b[s] = pair(f, psi1)
        assert ks_2samp(a, b).pvalue > 0.01


class TestFiniteVarianceIdentity:
    # E[<w, phi>^2] = var ||phi||_2^2 + mean^2 (int phi)^2 for the
    # finite-variance rows, with (var, mean) of the unit-volume law
    @pytest.mark.parametrize("model", [gaussian(2.0), poisson(1.5), laplace()])
    def test_second_moment(self, model):
        spec = GridSpec(d=1, J=4, L=0.5)
        phi = grid_function(spec, lambda x: np.cos(2.0 * x) + 0.5)
        nphi2 = float(np.sum(phi**2)) * spec.cell_volume
        iphi = float(np.sum(phi)) * spec.cell_volume
        expect = model.variance * nphi2 + (model.mean * iphi) ** 2
        vals = np.array([pair(sample_field(model, spec, seed=s), phi)
                         for s in range(60_000)])
        second = float(np.mean(vals**2))
        se = float(np.std(vals**2)) / math.sqrt(len(vals))
        assert abs(second - expect) < max(4.0 * se, 0.02 * expect), model.tag


class TestCFConsistency:
    @pytest.mark.parametrize("model", [
        gaussian(1.0), laplace(), sas(1.5), poisson(2.0),
        compound_poisson(1.0, jump_gaussian()),
    ])
    def test_empirical_cf_matches_functional(self, model):
        spec = GridSpec(d=1, J=3, L=0.5)
        phi = grid_function(spec, lambda x: np.exp(-8.0 * x**2))
        n = 200_000
        vals = np.empty(n)
        mat = draw_increments(model, spec.cell_volume, stream(17, "cf"), (n, 8))
        vals = mat @ phi
        for xi in (-5.0, -1.0, 0.7, 3.0, 5.0):
            emp = np.exp(1j * xi * vals).mean()
            ref = char_functional(model, phi, spec.cell_volume, xi)
            assert abs(emp - ref) < 3.0 / math.sqrt(n), (model.tag, xi)


class TestTruncationModel:
    def test_approximate_sampler_cf(self):
        nu = make_index_pair_measure(1.0, 0.5)
        approx, report = truncation_model(nu, eps=1e-3)
        assert report.jump_rate > 0
        assert 0 <= report.dropped_variance_fraction <= 1
        exact = custom_triplet(0.0, 0.0, nu)
        vol = 0.5
        x = draw_increments(approx, vol, stream(23, "trunc"), 300_000)
        for xi in (0.5, 1.0, 2.0):
            emp = np.exp(1j * xi * x).mean()
            ref = np.exp(vol * exact.exponent(xi))
            # MC error plus the small-jump normal substitution
            assert abs(emp - ref) < 3.0 / math.sqrt(len(x)) + 5e-3

    def test_drift_projection(self):
        spec = GridSpec(d=1, J=2)
        field = sample_field(drift(0.5), spec, seed=0)
        assert np.allclose(field.values, 0.5 * spec.cell_volume)
