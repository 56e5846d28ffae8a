"""Frame-based LPC analysis and two-band-excitation synthesis."""

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter, lfiltic

from ..errors import FrameError, NumericalError
from .lpc import autocorrelate, levinson_durbin, lpc_to_lsf, lsf_to_lpc
from .noise import lcg_noise
from .pitch import band_edges, estimate_f0, estimate_voicing_boundary

POWER_FLOOR_DB = -100.0


@dataclass(frozen=True)
class VocoderConfig:
    sample_rate: int = 16000
    order: int = 10
    frame_ms: float = 10.0
    window_ms: float = 25.0
    pitch_window_ms: float = 40.0
    clamp_f0: float = 400.0
    f0_min: float = 60.0
    f0_max: float = 350.0
    voicing_threshold: float = 0.5
    n_bands: int = 8
    harmonicity_threshold: float = 0.5
    silence_db: float = -60.0
    subframes: int = 4
    noise_seed: int = 12345
    # white-noise correction applied to r[0] before the recursion
    noise_floor: float = 1e-4

    @property
    def hop(self):
        return int(round(self.sample_rate * self.frame_ms / 1000.0))

    @property
    def window(self):
        return int(round(self.sample_rate * self.window_ms / 1000.0))

    @property
    def pitch_window(self):
        return int(round(self.sample_rate * self.pitch_window_ms / 1000.0))

    @property
    def nyquist(self):
        return self.sample_rate / 2.0

    @property
    def n_params(self):
        return self.order + 3


@dataclass
class AcousticFrame:
    lsf: np.ndarray
    f0: float
    power: float
    voicing_boundary: float
    voiced: bool = field(default=True)

    def vector(self):
        return np.concatenate([self.lsf, [self.f0, self.power, self.voicing_boundary]])

    def validate(self, config=VocoderConfig()):
        """Raise ValueError naming the first violated invariant."""
        lsf = np.asarray(self.lsf, dtype=float)
        if len(lsf) != config.order:
            raise ValueError(f"expected {config.order} LSFs, got {len(lsf)}")
        if not (lsf[0] > 0.0 and lsf[-1] < np.pi and np.all(np.diff(lsf) > 0.0)):
            raise ValueError("LSFs not strictly increasing inside (0, pi)")
        if not self.f0 > 0.0:
            raise ValueError("f0 must be positive")
        if not 0.0 <= self.voicing_boundary <= config.nyquist:
            raise ValueError("voicing boundary outside [0, Nyquist]")
        if not self.voiced:
            if self.f0 != config.clamp_f0:
                raise ValueError("unvoiced frame must carry the clamp f0")
            if self.voicing_boundary != 0.0:
                raise ValueError("unvoiced frame must have a zero voicing boundary")


def frame_from_vector(vec, config=VocoderConfig()):
    vec = np.asarray(vec, dtype=float)
    p = config.order
    f0 = float(vec[p])
    return AcousticFrame(vec[:p].copy(), f0, float(vec[p + 1]), float(vec[p + 2]),
                         voiced=f0 < config.clamp_f0)


def to_float(samples):
    x = np.asarray(samples)
    if np.issubdtype(x.dtype, np.integer):
        return x.astype(float) / 32768.0
    return x.astype(float)


def _block(x, centre, length):
    start = centre - length // 2
    out = np.zeros(length)
    lo, hi = max(start, 0), min(start + length, len(x))
    if hi > lo:
        out[lo - start: hi - start] = x[lo:hi]
    return out


def flat_lsf(order):
    return np.arange(1, order + 1) * np.pi / (order + 1)


def analyze_frame(x, index, config=VocoderConfig()):
    hop = config.hop
    centre = index * hop + hop // 2
    win = np.hamming(config.window)
    seg = _block(x, centre, config.window) * win
    power = float(np.sum(seg * seg) / np.sum(win * win))
    power_db = 10.0 * np.log10(power) if power > 10.0 ** (POWER_FLOOR_DB / 10.0) else POWER_FLOOR_DB
    r = autocorrelate(seg, config.order)
    if power_db <= POWER_FLOOR_DB or r[0] <= 0.0:
        lsf = flat_lsf(config.order)
    else:
        r = r.copy()
        r[0] *= 1.0 + config.noise_floor
        try:
            model, _ = levinson_durbin(r, config.order)
            lsf = lpc_to_lsf(model)
        except NumericalError as exc:
            raise FrameError(str(exc), index) from exc
    f0, voiced, _ = estimate_f0(_block(x, centre, config.pitch_window), config.sample_rate,
                                config.f0_min, config.f0_max, config.clamp_f0,
                                config.voicing_threshold)
    if power_db < config.silence_db:
        voiced = False
    if voiced:
        boundary = estimate_voicing_boundary(_block(x, centre, config.pitch_window), f0,
                                             config.sample_rate, config.n_bands,
                                             config.harmonicity_threshold)
    else:
        f0, boundary = config.clamp_f0, 0.0
    return AcousticFrame(lsf, float(f0), float(power_db), float(boundary), bool(voiced))


def analyze(samples, config=VocoderConfig()):
    """One AcousticFrame per hop; integer input is read as 16-bit PCM."""
    x = to_float(samples)
    n_frames = len(x) // config.hop
    return [analyze_frame(x, i, config) for i in range(n_frames)]


def _check_frames(frames, config):
    for i, fr in enumerate(frames):
        try:
            fr.validate(config)
        except ValueError as exc:
            raise FrameError(str(exc), i) from None


def _subframe_tracks(frames, config):
    """Per-subframe LSF, f0 and boundary, interpolated from the previous frame."""
    n_sub = config.subframes
    lsf = np.array([f.lsf for f in frames], dtype=float)
    f0 = np.array([f.f0 for f in frames], dtype=float)
    voiced = np.array([f.voiced for f in frames])
    bound = np.array([f.voicing_boundary for f in frames], dtype=float)
    prev = np.concatenate([[0], np.arange(len(frames) - 1)])
    alpha = (np.arange(n_sub) + 1.0) / n_sub
    sub_lsf = (1 - alpha)[None, :, None] * lsf[prev][:, None, :] + alpha[None, :, None] * lsf[:, None, :]
    # hold the voiced pitch across voiced/unvoiced transitions
    f0_prev = np.where(voiced[prev], f0[prev], f0)
    f0_cur = np.where(voiced, f0, f0_prev)
    sub_f0 = (1 - alpha)[None, :] * f0_prev[:, None] + alpha[None, :] * f0_cur[:, None]
    sub_bound = (1 - alpha)[None, :] * bound[prev][:, None] + alpha[None, :] * bound[:, None]
    return (sub_lsf.reshape(-1, config.order), sub_f0.reshape(-1), sub_bound.reshape(-1))


def _excitation(sub_f0, sub_bound, n_samples, config):
    sr = config.sample_rate
    nyq = config.nyquist
    sub_len = n_samples // len(sub_f0)
    f0 = np.repeat(sub_f0, sub_len)
    bound = np.repeat(sub_bound, sub_len)
    phase = 2.0 * np.pi * np.cumsum(f0) / sr
    phase = np.concatenate([[0.0], phase[:-1]])
    k_max = int(np.ceil(bound.max() / f0.min())) + 1 if bound.max() > 0 else 0
    voiced = np.zeros(n_samples)
    # equal spectral density to unit-variance white noise: each harmonic carries f0/nyq power
    amp = np.sqrt(2.0 * f0 / nyq)
    for k in range(1, k_max + 1):
        # soft roll-in of the harmonic that straddles the boundary
        gain = np.clip((bound - k * f0) / f0 + 0.5, 0.0, 1.0)
        if not gain.any():
            continue
        voiced += gain * amp * np.cos(k * phase)
    noise = lcg_noise(n_samples, config.noise_seed)
    spec = np.fft.rfft(noise)
    freqs = np.fft.rfftfreq(n_samples, 1.0 / sr)
    edges = band_edges(sr, config.n_bands)
    unvoiced = np.zeros(n_samples)
    for b in range(config.n_bands):
        lo, hi = edges[b], edges[b + 1]
        upper = freqs <= hi if b == config.n_bands - 1 else freqs < hi
        band = np.fft.irfft(spec * ((freqs >= lo) & upper), n_samples)
        frac = np.clip((hi - bound) / (hi - lo), 0.0, 1.0)
        unvoiced += np.sqrt(frac) * band
    return voiced + unvoiced


def synthesize(frames, config=VocoderConfig()):
    """Rebuild a float waveform (full scale 1.0) from acoustic frames.

    Output length is one hop per frame; noise is seeded so output is
    bit-reproducible.
    """
    if len(frames) == 0:
        return np.zeros(0)
    _check_frames(frames, config)
    hop = config.hop
    n = hop * len(frames)
    if hop % config.subframes:
        raise ValueError("hop must divide into whole subframes")
    sub_len = hop // config.subframes
    sub_lsf, sub_f0, sub_bound = _subframe_tracks(frames, config)
    exc = _excitation(sub_f0, sub_bound, n, config)
    y = np.zeros(n)
    past = np.zeros(config.order)
    for s in range(len(sub_f0)):
        poly = np.concatenate([[1.0], -lsf_to_lpc(sub_lsf[s])])
        zi = lfiltic([1.0], poly, past[::-1])
        chunk, _ = lfilter([1.0], poly, exc[s * sub_len:(s + 1) * sub_len], zi=zi)
        y[s * sub_len:(s + 1) * sub_len] = chunk
        past = np.concatenate([past, chunk])[-config.order:]
    target = 10.0 ** (np.array([f.power for f in frames]) / 10.0)
    measured = np.mean(y.reshape(len(frames), hop) ** 2, axis=1)
    log_gain = 0.5 * (np.log(target) - np.log(np.maximum(measured, 1e-300)))
    centres = np.arange(len(frames)) * hop + hop / 2.0
    gain = np.exp(np.interp(np.arange(n), centres, log_gain))
    return y * gain
