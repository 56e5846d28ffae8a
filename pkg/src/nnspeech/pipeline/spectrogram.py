"""Grayscale log-magnitude spectrograms written as binary PGM."""

import numpy as np

from ..vocoder.coder import to_float

WINDOW = 400   # 25 ms at 16 kHz
HOP = 80       # 5 ms
NFFT = 512
RANGE_DB = 50.0


def spectrogram_db(samples, window=WINDOW, hop=HOP, nfft=NFFT):
    """(nfft//2 + 1, n_frames) power in dB; silent input gives -inf."""
    x = to_float(samples)
    if len(x) < window:
        x = np.pad(x, (0, window - len(x)))
    n = 1 + (len(x) - window) // hop
    idx = np.arange(window)[None, :] + hop * np.arange(n)[:, None]
    frames = x[idx] * np.hanning(window)
    power = np.abs(np.fft.rfft(frames, nfft, axis=1)) ** 2
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(power.T)


def render(db, range_db=RANGE_DB):
    """8-bit image, highest frequency in the top row, loud = dark."""
    finite = db[np.isfinite(db)]
    if finite.size == 0:
        return np.full(db.shape, 255, dtype=np.uint8)[::-1]
    top = finite.max()
    level = np.clip((np.nan_to_num(db, neginf=top - range_db) - (top - range_db)) / range_db, 0.0, 1.0)
    return np.round(255.0 * (1.0 - level)).astype(np.uint8)[::-1]


def write_pgm(path, image):
    image = np.asarray(image, dtype=np.uint8)
    rows, cols = image.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{cols} {rows}\n255\n".encode("ascii"))
        f.write(image.tobytes())


def read_pgm(path):
    with open(path, "rb") as f:
        data = f.read()
    parts = data.split(maxsplit=4)
    if parts[0] != b"P5":
        raise ValueError("not a binary PGM")
    cols, rows = int(parts[1]), int(parts[2])
    return np.frombuffer(parts[4][: rows * cols], dtype=np.uint8).reshape(rows, cols)
