"""Complex baseband signal primitives.

Power normalization, SNR-calibrated complex Gaussian noise injection,
band-limited length normalization and autocorrelation preprocessing.
All functions are pure given (input, generator); none hold state.

The noise model is

    y[k] = A * x[k] + n[k],        A = sqrt(2 * sigma^2 * 10^(snr_db/10))

with x unit mean power and n complex Gaussian, real and imaginary parts
independent Normal(0, sigma^2), so the linear SNR is A^2 / (2 sigma^2).
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .rng import complex_normal

DEFAULT_SAMPLE_RATE_HZ = 100e6
DEFAULT_SIGNAL_LENGTH = 1024

# Tolerance on "unit mean power" accepted by apply_snr.
_UNIT_POWER_TOL = 1e-6


@dataclass
class IQSignal:
    """Fixed-length complex baseband sequence with its sample rate.

    ``samples`` holds dimensionless baseband amplitudes; the in-phase and
    quadrature components are the real and imaginary parts.
    """

    samples: np.ndarray
    sample_rate_hz: float = DEFAULT_SAMPLE_RATE_HZ

    def __post_init__(self):
        self.samples = np.asarray(self.samples)
        if self.samples.ndim != 1:
            raise ValueError("IQSignal samples must be one-dimensional")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("IQSignal samples must be finite")

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def iq(self) -> np.ndarray:
        """Samples as a (length, 2) real array, I then Q."""
        return np.stack([self.samples.real, self.samples.imag], axis=-1)


@dataclass
class NoiseSpec:
    """Noise level for one example.

    sigma is the per-component standard deviation of the complex Gaussian
    noise; amplitude_scale is the signal scale factor A implied by the
    requested SNR.
    """

    snr_db: float
    sigma: float = 1.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")

    @property
    def amplitude_scale(self) -> float:
        return math.sqrt(2.0 * self.sigma**2 * 10.0 ** (self.snr_db / 10.0))


def mean_power(x: np.ndarray) -> float:
    """Average of |sample|^2 along the last axis (scalar for 1-D input)."""
    x = np.asarray(x)
    p = np.mean(np.abs(x) ** 2, axis=-1)
    return float(p) if p.ndim == 0 else p


def normalize_power(x: np.ndarray) -> np.ndarray:
    """Scale x to unit mean power (mean of |sample|^2 equal to 1).

    Raises ValueError for empty or all-zero input, which cannot carry a
    power normalization.
    """
    x = np.asarray(x)
    if x.size == 0:
        raise ValueError("cannot normalize an empty signal")
    p = np.mean(np.abs(x) ** 2)
    if p <= 0.0:
        raise ValueError("cannot normalize an all-zero signal")
    return x / np.sqrt(p)


def apply_snr(x_norm: np.ndarray, noise: NoiseSpec, rng: np.random.Generator) -> np.ndarray:
    """Scale a unit-power signal and add complex Gaussian noise.

    Returns A * x_norm + n with n drawn from the seeded generator via the
    Box-Muller construction documented in :mod:`radarbench.rng`. Rejects
    inputs whose mean power deviates from 1 by more than 1e-6.
    """
    x_norm = np.asarray(x_norm)
    p = np.mean(np.abs(x_norm) ** 2)
    if abs(p - 1.0) > _UNIT_POWER_TOL:
        raise ValueError(f"apply_snr expects unit mean power, got {p!r}")
    n = complex_normal(rng, x_norm.size, noise.sigma)
    return noise.amplitude_scale * x_norm + n


def resample_to_length(x: np.ndarray, n_target: int) -> np.ndarray:
    """Band-limited resampling to exactly n_target samples.

    Frequency-domain method: take the DFT, symmetrically zero-pad or
    truncate the spectrum, inverse-transform and rescale. Preserves the
    spectral shape up to the rescaling of the time axis, and preserves DC
    exactly. A same-length request returns the input unchanged (copy).
    """
    x = np.asarray(x, dtype=np.complex128)
    n = x.size
    if n < 2:
        raise ValueError("resample_to_length needs at least 2 input samples")
    if n_target < 2:
        raise ValueError("resample_to_length target must be at least 2")
    if n_target == n:
        return x.copy()

    spec = np.fft.fft(x)
    out = np.zeros(n_target, dtype=np.complex128)
    m = min(n, n_target)
    npos = (m + 1) // 2  # DC plus positive frequencies, excluding a shared Nyquist bin
    nneg = (m - 1) // 2
    out[:npos] = spec[:npos]
    if nneg:
        out[-nneg:] = spec[-nneg:]
    if m % 2 == 0:
        k = m // 2
        if n_target > n:
            # The input Nyquist bin splits symmetrically over +/- k.
            out[k] = 0.5 * spec[k]
            out[n_target - k] = 0.5 * spec[k]
        else:
            # The input bins at +/- k fold onto the output Nyquist bin.
            out[k] = spec[k] + spec[n - k]
    return np.fft.ifft(out) * (n_target / n)


def autocorrelation(x: np.ndarray, normalize: bool = True) -> np.ndarray:
    """Aperiodic autocorrelation R[k] = sum_n x[n] * conj(x[n-k]), k >= 0.

    Output has the same length as the input (lags 0..len-1) so it can feed
    the same classifier input contract; by default it is renormalized to
    unit mean power. Accepts (..., length) batches; the transform applies
    along the last axis.

    ``normalize=False`` returns the raw correlation values.
    """
    x = np.asarray(x, dtype=np.complex128)
    n = x.shape[-1]
    if n == 0:
        raise ValueError("autocorrelation of an empty signal")
    nfft = 2 * n
    spec = np.fft.fft(x, n=nfft, axis=-1)
    r = np.fft.ifft(spec * np.conj(spec), axis=-1)[..., :n]
    if not normalize:
        return r
    p = np.mean(np.abs(r) ** 2, axis=-1, keepdims=True)
    if np.any(p <= 0.0):
        raise ValueError("cannot normalize an all-zero autocorrelation")
    return r / np.sqrt(p)
