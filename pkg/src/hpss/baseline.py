"""Median-filter HPSS: pre-estimator, solver initializer, and baseline.

Time-directional medians of the magnitude spectrogram capture horizontal
(harmonic) structure, frequency-directional medians capture vertical
(percussive) structure; a soft Wiener-type mask splits the mixture.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import median_filter

from .audio_io import Signal, as_samples
from .prox import SignalPair
from .stft import Spectrogram, StftConfig, adjoint, forward


@dataclass(frozen=True)
class MedianConfig:
    """Median kernel lengths (odd) and the Wiener mask exponent."""

    harm_kernel: int = 17
    perc_kernel: int = 17
    mask_power: float = 2.0

    def __post_init__(self):
        for k in (self.harm_kernel, self.perc_kernel):
            if k < 3 or k % 2 == 0:
                raise ValueError("median kernels must be odd and >= 3")
        if self.mask_power < 1.0:
            raise ValueError("mask_power must be >= 1")


def _median_shrink(mag: np.ndarray, kernel: int, axis: int) -> np.ndarray:
    """Running median along one axis with shrinking windows at the edges."""
    size = (1, kernel) if axis == 1 else (kernel, 1)
    out = median_filter(mag, size=size, mode="nearest")
    half = kernel // 2
    n = mag.shape[axis]
    for i in range(min(half, n)):
        lo = np.median(mag.take(range(0, min(i + half + 1, n)), axis=axis), axis=axis)
        hi = np.median(mag.take(range(max(n - 1 - i - half, 0), n), axis=axis), axis=axis)
        if axis == 1:
            out[:, i] = lo
            out[:, n - 1 - i] = hi
        else:
            out[i, :] = lo
            out[n - 1 - i, :] = hi
    return out


def median_filter_hpss(spec: Spectrogram, mc: MedianConfig = MedianConfig()):
    """Return (H_mag, P_mag, mask_h) for a mixture spectrogram.

    H_mag is the time-directional median of |X|, P_mag the
    frequency-directional median; mask_h = H^p / (H^p + P^p) with the
    0/0 case mapped to 0.5. The soft-masked harmonic spectrogram is
    mask_h * X.
    """
    mag = np.abs(spec.data)
    if mag.size == 0:
        raise ValueError("empty spectrogram")
    h_mag = _median_shrink(mag, mc.harm_kernel, axis=1)
    p_mag = _median_shrink(mag, mc.perc_kernel, axis=0)
    num = h_mag**mc.mask_power
    den = num + p_mag**mc.mask_power
    with np.errstate(invalid="ignore", divide="ignore"):
        mask = np.where(den > 0.0, num / den, 0.5)
    return h_mag, p_mag, mask


def mf_separate(x, config: StftConfig, mc: MedianConfig = MedianConfig()) -> SignalPair:
    """Median-filter separation: soft-masked harmonic, exact-sum percussive."""
    samples = as_samples(x)
    rate = x.sample_rate if isinstance(x, Signal) else 1
    spec = forward(samples, config)
    _, _, mask = median_filter_hpss(spec, mc)
    x_h = adjoint(spec.with_data(mask * spec.data))
    return SignalPair(Signal(x_h, rate), Signal(samples - x_h, rate))


def compute_weight(pre_h, kappa: float = 0.001) -> np.ndarray:
    """Smoothness weight kappa / max(kappa, normalized harmonic amplitude).

    Magnitudes of the pre-estimated harmonic spectrogram are normalized
    by their global maximum, so entries lie in (0, 1] and strong
    harmonic bins receive the smallest smoothing weight. An all-zero
    pre-estimate degenerates to a uniform weight of one.
    """
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    mag = np.abs(pre_h.data if isinstance(pre_h, Spectrogram) else np.asarray(pre_h))
    peak = mag.max() if mag.size else 0.0
    if peak == 0.0:
        return np.ones_like(mag)
    return kappa / np.maximum(kappa, mag / peak)
