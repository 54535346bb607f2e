import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from radarbench import rng as rngmod
from radarbench.signal import (
    IQSignal,
    NoiseSpec,
    apply_snr,
    autocorrelation,
    mean_power,
    normalize_power,
    resample_to_length,
)


def brute_autocorrelation(x):
    n = len(x)
    return np.array(
        [sum(x[i] * np.conj(x[i - k]) for i in range(k, n)) for k in range(n)]
    )


class TestNormalizePower:
    def test_constant_sequence(self):
        out = normalize_power(np.full(8, 2.0 + 0.0j))
        assert np.allclose(out, np.ones(8), atol=1e-12)

    def test_unit_power_tone_unchanged(self):
        tone = np.exp(2j * np.pi * 0.1 * np.arange(64))
        assert np.allclose(normalize_power(tone), tone, atol=1e-9)

    def test_zero_input_rejected(self):
        with pytest.raises(ValueError):
            normalize_power(np.zeros(16, dtype=complex))

    def test_empty_input_rejected(self):
        with pytest.raises(ValueError):
            normalize_power(np.array([], dtype=complex))

    @settings(max_examples=50, deadline=None)
    @given(st.integers(min_value=0, max_value=2**32 - 1))
    def test_output_power_is_one(self, seed):
        gen = np.random.default_rng(seed)
        x = gen.normal(size=32) + 1j * gen.normal(size=32)
        assert abs(mean_power(normalize_power(x)) - 1.0) <= 1e-9


class TestNoiseSpec:
    def test_amplitude_at_0db(self):
        assert NoiseSpec(0.0).amplitude_scale == pytest.approx(np.sqrt(2.0))

    def test_amplitude_at_20db(self):
        assert NoiseSpec(20.0).amplitude_scale == pytest.approx(np.sqrt(200.0))

    def test_sigma_must_be_positive(self):
        with pytest.raises(ValueError):
            NoiseSpec(0.0, sigma=0.0)


class TestApplySnr:
    def test_rejects_non_unit_power(self):
        with pytest.raises(ValueError, match="unit mean power"):
            apply_snr(np.full(32, 2.0 + 0j), NoiseSpec(10.0), rngmod.stream(0))

    def test_bit_reproducible(self):
        x = normalize_power(np.exp(2j * np.pi * 0.07 * np.arange(256)))
        a = apply_snr(x, NoiseSpec(5.0), rngmod.stream(11, 4))
        b = apply_snr(x, NoiseSpec(5.0), rngmod.stream(11, 4))
        assert np.array_equal(a, b)

    def test_empirical_snr_six_db(self):
        # 100 signals x 1024 samples ~ 1e5 noise draws
        spec = NoiseSpec(6.0)
        a = spec.amplitude_scale
        sig_power = 0.0
        noise_power = 0.0
        for i in range(100):
            x = normalize_power(np.exp(2j * np.pi * (0.01 + 1e-4 * i) * np.arange(1024)))
            y = apply_snr(x, spec, rngmod.stream(77, i))
            noise = y - a * x
            sig_power += np.sum(np.abs(a * x) ** 2)
            noise_power += np.sum(np.abs(noise) ** 2)
        est_db = 10.0 * np.log10(sig_power / noise_power)
        assert est_db == pytest.approx(6.0, abs=0.1)

    def test_noise_component_variance(self):
        # per-component variance equals sigma^2 for the raw CAWN draw
        n = rngmod.complex_normal(rngmod.stream(5), 100_000, sigma=1.0)
        assert np.var(n.real) == pytest.approx(1.0, rel=0.02)
        assert np.var(n.imag) == pytest.approx(1.0, rel=0.02)


class TestResample:
    def test_identity_length(self):
        x = np.exp(2j * np.pi * 0.05 * np.arange(1024))
        assert np.allclose(resample_to_length(x, 1024), x, atol=1e-9)

    def test_constant_upsample(self):
        out = resample_to_length(np.full(512, 3.25 + 0j), 1024)
        assert out.shape == (1024,)
        assert np.allclose(out, 3.25, atol=1e-12)

    def test_tone_frequency_halves_on_doubling(self):
        x = np.exp(2j * np.pi * 0.1 * np.arange(512))
        out = resample_to_length(x, 1024)
        peak = np.argmax(np.abs(np.fft.fft(out)))
        assert abs(peak / 1024 - 0.05) <= 1.0 / 1024

    def test_short_target_rejected(self):
        with pytest.raises(ValueError):
            resample_to_length(np.ones(8, dtype=complex), 1)

    def test_short_input_rejected(self):
        with pytest.raises(ValueError):
            resample_to_length(np.ones(1, dtype=complex), 8)

    @settings(max_examples=25, deadline=None)
    @given(
        st.integers(min_value=2, max_value=64),
        st.integers(min_value=2, max_value=128),
    )
    def test_length_exact_and_dc_preserved(self, n_in, n_out):
        x = np.full(n_in, 1.5 - 0.5j)
        out = resample_to_length(x, n_out)
        assert out.shape == (n_out,)
        assert np.allclose(out, 1.5 - 0.5j, atol=1e-12)


class TestAutocorrelation:
    def test_unit_impulse(self):
        x = np.zeros(16, dtype=complex)
        x[0] = 1.0
        r = autocorrelation(x, normalize=False)
        assert abs(r[0] - 1.0) < 1e-12
        assert np.abs(r[1:]).max() < 1e-12

    def test_barker13_sidelobes(self):
        from radarbench.codes import barker_sequence

        x = barker_sequence(13)
        r = autocorrelation(x, normalize=False)
        expected = brute_autocorrelation(x)
        assert np.allclose(r, expected, atol=1e-9)
        assert abs(r[0]) == pytest.approx(13.0)
        assert np.abs(r[1:]).max() <= 1.0 + 1e-9

    def test_zero_input_fails_normalization(self):
        with pytest.raises(ValueError):
            autocorrelation(np.zeros(32, dtype=complex))

    def test_normalized_output_unit_power(self):
        gen = np.random.default_rng(3)
        x = gen.normal(size=128) + 1j * gen.normal(size=128)
        assert mean_power(autocorrelation(x)) == pytest.approx(1.0, abs=1e-9)

    def test_batch_matches_per_row(self):
        gen = np.random.default_rng(4)
        x = gen.normal(size=(3, 64)) + 1j * gen.normal(size=(3, 64))
        batch = autocorrelation(x)
        rows = np.stack([autocorrelation(row) for row in x])
        assert np.allclose(batch, rows, atol=1e-12)


class TestIQSignal:
    def test_iq_stacking(self):
        sig = IQSignal(np.array([1 + 2j, 3 - 4j]))
        assert np.array_equal(sig.iq, np.array([[1.0, 2.0], [3.0, -4.0]]))
        assert len(sig) == 2

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            IQSignal(np.array([1.0 + 0j, np.nan + 0j]))
