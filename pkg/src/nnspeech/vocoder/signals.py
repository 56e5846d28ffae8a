"""Test signals with known source and filter."""

import numpy as np
from scipy.signal import lfilter


def resonator_poly(formants, bandwidths, sample_rate):
    """A(z) of a cascade of two-pole resonators, leading 1 included."""
    poly = np.array([1.0])
    for f, bw in zip(formants, bandwidths):
        r = np.exp(-np.pi * bw / sample_rate)
        theta = 2 * np.pi * f / sample_rate
        poly = np.convolve(poly, [1.0, -2 * r * np.cos(theta), r * r])
    return poly


def pulse_train(f0, n_samples, sample_rate):
    x = np.zeros(n_samples)
    period = sample_rate / f0
    x[np.round(np.arange(0, n_samples, period)).astype(int) % n_samples] = 1.0
    return x


def synthetic_vowel(f0=120.0, formants=(500.0, 1500.0), bandwidths=(80.0, 120.0),
                    duration=1.0, sample_rate=16000, level_db=-20.0):
    """Pulse train through a fixed all-pole formant filter, scaled to ``level_db`` dBFS."""
    n = int(round(duration * sample_rate))
    y = lfilter([1.0], resonator_poly(formants, bandwidths, sample_rate),
                pulse_train(f0, n, sample_rate))
    y *= np.sqrt(10.0 ** (level_db / 10.0) / np.mean(y * y))
    return y
