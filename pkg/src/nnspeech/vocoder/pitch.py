"""F0 and voicing-boundary estimation."""

import numpy as np

# blocks below this RMS (about -90 dBFS) are treated as silence
_ENERGY_FLOOR = 3e-5


def normalized_autocorrelation(x, min_lag, max_lag):
    """rho(L) = sum x[i] x[i+L] / sqrt(sum x[i]^2 * sum x[i+L]^2) for L in [min_lag, max_lag]."""
    n = len(x)
    nfft = 1 << int(np.ceil(np.log2(2 * n)))
    spec = np.fft.rfft(x, nfft)
    acf = np.fft.irfft(spec * np.conj(spec), nfft)[:n]
    csum = np.concatenate([[0.0], np.cumsum(x * x)])
    lags = np.arange(min_lag, max_lag + 1)
    head = csum[n - lags]                 # energy of x[0 : n-L]
    tail = csum[n] - csum[lags]           # energy of x[L : n]
    den = np.sqrt(head * tail)
    rho = np.where(den > 0, acf[lags] / np.where(den > 0, den, 1.0), 0.0)
    return lags, rho


def estimate_f0(block, sample_rate, f0_min, f0_max, clamp_f0=400.0, threshold=0.5):
    """Return ``(f0, voiced, periodicity)`` from a normalized-autocorrelation peak search.

    The shortest-lag peak within 10% of the best one is taken, which avoids
    picking a period multiple. Unvoiced blocks report ``clamp_f0``.
    """
    x = np.asarray(block, dtype=float)
    if len(x) < 2 * sample_rate / f0_min:
        raise ValueError("block shorter than two periods of f0_min")
    x = x - x.mean()
    if np.sqrt(np.mean(x * x)) < _ENERGY_FLOOR:
        return clamp_f0, False, 0.0
    min_lag = max(2, int(np.floor(sample_rate / f0_max)))
    max_lag = int(np.ceil(sample_rate / f0_min))
    lags, rho = normalized_autocorrelation(x, min_lag - 1, max_lag + 1)
    inner = np.arange(1, len(rho) - 1)
    peaks = inner[(rho[inner] >= rho[inner - 1]) & (rho[inner] > rho[inner + 1])]
    if len(peaks) == 0:
        return clamp_f0, False, float(max(0.0, rho.max()))
    best = rho[peaks].max()
    periodicity = float(np.clip(best, 0.0, 1.0))
    if periodicity < threshold:
        return clamp_f0, False, periodicity
    i = peaks[np.nonzero(rho[peaks] >= 0.9 * best)[0][0]]
    a, b, c = rho[i - 1], rho[i], rho[i + 1]
    denom = a - 2 * b + c
    shift = 0.5 * (a - c) / denom if denom < 0 else 0.0
    f0 = sample_rate / (lags[i] + shift)
    return float(f0), True, periodicity


def band_edges(sample_rate, n_bands):
    return np.linspace(0.0, sample_rate / 2.0, n_bands + 1)


def band_harmonicity(block, f0, sample_rate, n_bands):
    """Per-band normalized correlation at one pitch period, plus band energies.

    Each band is isolated with a brick-wall mask on a zero-padded spectrum and
    compared with a copy delayed by exactly sample_rate/f0 samples (fractional
    delay applied as a phase shift).
    """
    x = np.asarray(block, dtype=float)
    x = (x - x.mean()) * np.hanning(len(x))
    n = len(x)
    nfft = 2 * n
    spec = np.fft.rfft(x, nfft)
    freqs = np.fft.rfftfreq(nfft, 1.0 / sample_rate)
    period = sample_rate / f0
    lag = int(np.ceil(period))
    shift = np.exp(-2j * np.pi * freqs * period / sample_rate)
    edges = band_edges(sample_rate, n_bands)
    harm = np.zeros(n_bands)
    energy = np.zeros(n_bands)
    for b in range(n_bands):
        upper = freqs <= edges[b + 1] if b == n_bands - 1 else freqs < edges[b + 1]
        mask = (freqs >= edges[b]) & upper
        xb = np.fft.irfft(spec * mask, nfft)
        yb = np.fft.irfft(spec * mask * shift, nfft)
        u, v = xb[lag:n], yb[lag:n]
        energy[b] = np.sum(xb[:n] ** 2)
        den = np.sqrt(np.dot(u, u) * np.dot(v, v))
        harm[b] = np.dot(u, v) / den if den > 0 else 0.0
    return harm, energy


def estimate_voicing_boundary(block, f0, sample_rate, n_bands=8, threshold=0.5, energy_floor_db=-50.0):
    """Upper edge of the highest band such that it and every band below it are harmonic.

    Bands carrying negligible energy (below ``energy_floor_db`` relative to the
    strongest band) do not break the harmonic run.
    """
    harm, energy = band_harmonicity(block, f0, sample_rate, n_bands)
    edges = band_edges(sample_rate, n_bands)
    if energy.max() <= 0.0:
        return 0.0
    quiet = energy < energy.max() * 10.0 ** (energy_floor_db / 10.0)
    ok = (harm >= threshold) | quiet
    top = 0
    while top < n_bands and ok[top]:
        top += 1
    return float(edges[top])
