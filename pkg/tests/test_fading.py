"""Spectra, undersampled spectra, and sample-path statistics."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relaytrain.fading import (
    GaussMarkov,
    Lowpass,
    autocorrelation,
    psd,
    resolution_ladder,
    sample_path,
    spectral_grid,
    spectrum_integral,
    undersampled_psd,
)

TWO_PI = 2.0 * math.pi


class TestPsd:
    def test_gauss_markov_peak_value(self):
        # (1 - 0.99^2) / (1 - 0.99)^2 = 199
        assert psd(GaussMarkov(0.99, 1.0), 0.0) == pytest.approx(199.0, rel=1e-12)

    def test_memoryless_is_white(self):
        proc = GaussMarkov(0.0, 1.0)
        for w in (-math.pi, -1.0, 0.0, 0.3, math.pi):
            assert psd(proc, w) == pytest.approx(1.0, rel=1e-15)

    def test_lowpass_band_and_stopband(self):
        proc = Lowpass(0.1, 1.0)
        assert psd(proc, 0.0) == pytest.approx(5.0, rel=1e-15)
        assert psd(proc, math.pi) == 0.0
        # closed passband: the edge evaluates to the in-band value
        assert psd(proc, proc.band_edge) == pytest.approx(5.0, rel=1e-15)

    @given(
        alpha=st.floats(min_value=0.0, max_value=0.995),
        w=st.floats(min_value=-math.pi, max_value=math.pi),
    )
    def test_gauss_markov_nonnegative(self, alpha, w):
        assert psd(GaussMarkov(alpha, 2.0), w) >= 0.0

    def test_invalid_parameters_rejected(self):
        with pytest.raises(ValueError):
            GaussMarkov(1.0, 1.0)
        with pytest.raises(ValueError):
            GaussMarkov(-0.1, 1.0)
        with pytest.raises(ValueError):
            Lowpass(0.0, 1.0)
        with pytest.raises(ValueError):
            Lowpass(0.6, 1.0)


class TestUndersampledPsd:
    def test_period_one_is_identity(self):
        for proc in (GaussMarkov(0.9, 3.0), Lowpass(0.05, 2.0)):
            for w in (-2.0, 0.0, 0.7):
                assert undersampled_psd(proc, 1, 0, w) == pytest.approx(
                    psd(proc, w), rel=1e-12
                )

    def test_white_cross_spectrum_vanishes(self):
        # sum of 4th roots of unity
        proc = GaussMarkov(0.0, 1.0)
        for w in (-1.0, 0.0, 2.2):
            assert abs(undersampled_psd(proc, 4, 1, w)) < 1e-12

    def test_lowpass_alias_free_closed_form(self):
        # Derived by carrying out the k-sum symbolically: with
        # period * max_doppler < 1/2 only the k = 0 image lands in
        # [-pi, pi], giving variance / (2 * max_doppler * period) inside
        # |w| < 2*pi*max_doppler*period and zero outside.
        proc = Lowpass(0.05, 4.0)
        period = 8
        inner = TWO_PI * proc.max_doppler * period  # ~2.513
        expected = proc.variance / (2.0 * proc.max_doppler * period)
        for w in (0.0, 1.0, -2.4, 0.99 * inner):
            val = undersampled_psd(proc, period, 0, w)
            assert val.imag == pytest.approx(0.0, abs=1e-12)
            assert val.real == pytest.approx(expected, rel=1e-12)
        for w in (1.01 * inner, math.pi, -3.0):
            assert abs(undersampled_psd(proc, period, 0, w)) < 1e-12

    def test_zero_offset_real_nonnegative_on_grid(self):
        for proc in (GaussMarkov(0.99, 1.0), Lowpass(0.04, 1.0)):
            for period in (2, 8):
                w, _ = spectral_grid(proc, period, resolution_ladder(proc)[0])
                vals = undersampled_psd(proc, period, 0, w)
                assert np.max(np.abs(vals.imag)) < 1e-10
                assert np.min(vals.real) > -1e-12

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            undersampled_psd(GaussMarkov(0.5), 0, 0, 0.0)
        with pytest.raises(ValueError):
            undersampled_psd(GaussMarkov(0.5), 4, 4, 0.0)


class TestSpectralIntegrals:
    @pytest.mark.parametrize("alpha", [0.0, 0.5, 0.9, 0.99])
    def test_gauss_markov_psd_normalization(self, alpha):
        proc = GaussMarkov(alpha, 2.5)
        val = spectrum_integral(lambda w: psd(proc, w), proc)
        assert val == pytest.approx(proc.variance, rel=1e-9)

    @pytest.mark.parametrize("doppler", [0.01, 0.1, 0.3])
    def test_lowpass_psd_normalization(self, doppler):
        proc = Lowpass(doppler, 1.7)
        val = spectrum_integral(lambda w: psd(proc, w), proc)
        assert val == pytest.approx(proc.variance, rel=1e-9)

    @pytest.mark.parametrize("lag", [0, 1, 2, 5])
    @pytest.mark.parametrize("alpha", [0.5, 0.9, 0.99])
    def test_gauss_markov_autocorrelation_from_psd(self, alpha, lag):
        proc = GaussMarkov(alpha, 1.3)
        val = spectrum_integral(lambda w: psd(proc, w) * np.exp(1j * w * lag), proc)
        assert val == pytest.approx(autocorrelation(proc, lag), abs=1e-6)

    @pytest.mark.parametrize("period", [1, 2, 8, 16])
    def test_sampling_preserves_variance(self, period):
        for proc in (GaussMarkov(0.95, 2.0), Lowpass(0.04, 2.0)):
            val = spectrum_integral(
                lambda w: undersampled_psd(proc, period, 0, w).real, proc, period
            )
            assert val == pytest.approx(proc.variance, rel=1e-6)

    def test_lowpass_autocorrelation_from_psd(self):
        proc = Lowpass(0.12, 2.0)
        for lag in (0, 1, 3):
            val = spectrum_integral(
                lambda w: psd(proc, w) * np.exp(1j * w * lag), proc
            )
            assert val == pytest.approx(autocorrelation(proc, lag), abs=1e-9)


class TestSamplePath:
    def test_gauss_markov_lag_one_correlation(self):
        proc = GaussMarkov(0.99, 1.0)
        h = sample_path(proc, 1_000_000, seed=7)
        rho = np.real(np.vdot(h[:-1], h[1:]) / np.vdot(h, h))
        assert rho == pytest.approx(0.99, abs=0.005)

    def test_memoryless_lag_one_correlation(self):
        h = sample_path(GaussMarkov(0.0, 1.0), 1_000_000, seed=8)
        rho = np.real(np.vdot(h[:-1], h[1:]) / np.vdot(h, h))
        assert rho == pytest.approx(0.0, abs=0.005)

    def test_gauss_markov_variance(self):
        proc = GaussMarkov(0.9, 4.0)
        h = sample_path(proc, 1_000_000, seed=9)
        assert np.mean(np.abs(h) ** 2) == pytest.approx(4.0, rel=0.01)

    def test_lowpass_variance(self):
        proc = Lowpass(0.05, 4.0)
        h = sample_path(proc, 1_000_000, seed=10)
        assert np.mean(np.abs(h) ** 2) == pytest.approx(4.0, rel=0.01)

    def test_lowpass_lag_correlation_matches_autocorrelation(self):
        proc = Lowpass(0.1, 1.0)
        h = sample_path(proc, 200_000, seed=11)
        for lag in (1, 3):
            emp = np.mean(h[lag:] * np.conj(h[:-lag])).real
            assert emp == pytest.approx(autocorrelation(proc, lag), abs=0.02)

    def test_seed_determinism(self):
        for proc in (GaussMarkov(0.8, 1.0), Lowpass(0.1, 1.0)):
            a = sample_path(proc, 500, seed=42)
            b = sample_path(proc, 500, seed=42)
            np.testing.assert_array_equal(a, b)
            c = sample_path(proc, 500, seed=43)
            assert not np.array_equal(a, c)

    def test_rejects_bad_length(self):
        with pytest.raises(ValueError):
            sample_path(GaussMarkov(0.5), 0, seed=0)
        with pytest.raises(ValueError):
            sample_path(Lowpass(0.1), -3, seed=0)


@settings(max_examples=25)
@given(lag=st.integers(min_value=0, max_value=50))
def test_autocorrelation_bounded_by_variance(lag):
    for proc in (GaussMarkov(0.97, 3.0), Lowpass(0.07, 3.0)):
        assert abs(autocorrelation(proc, lag)) <= proc.variance + 1e-12
