"""Binary acoustic parameter files ("AFRM").

Layout, little-endian: magic ``AFRM``, version u16, sample_rate u32,
order u16, frame_count u32, then frame_count records of (order + 3) float32
values: lsf[order], f0, power_db, voicing_boundary.
"""

import struct

import numpy as np

from ..errors import AudioFormatError
from .coder import AcousticFrame, VocoderConfig

MAGIC = b"AFRM"
VERSION = 1
_HEADER = struct.Struct("<4sHIHI")


def dumps_afrm(frames, sample_rate=16000, order=10):
    records = np.array([f.vector() for f in frames], dtype="<f4").reshape(len(frames), order + 3)
    return _HEADER.pack(MAGIC, VERSION, sample_rate, order, len(frames)) + records.tobytes()


def loads_afrm(data, clamp_f0=VocoderConfig.clamp_f0):
    if len(data) < _HEADER.size:
        raise AudioFormatError("AFRM file truncated")
    magic, version, sample_rate, order, count = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise AudioFormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise AudioFormatError(f"unsupported AFRM version {version}")
    expected = _HEADER.size + count * (order + 3) * 4
    if len(data) != expected:
        raise AudioFormatError(f"AFRM size {len(data)} != {expected} for {count} frames")
    records = np.frombuffer(data, dtype="<f4", offset=_HEADER.size).reshape(count, order + 3)
    frames = []
    for rec in records.astype(float):
        f0 = float(rec[order])
        frames.append(AcousticFrame(rec[:order].copy(), f0, float(rec[order + 1]),
                                    float(rec[order + 2]), voiced=f0 < clamp_f0))
    return frames, sample_rate


def write_afrm(path, frames, sample_rate=16000, order=10):
    with open(path, "wb") as fh:
        fh.write(dumps_afrm(frames, sample_rate, order))


def read_afrm(path, clamp_f0=VocoderConfig.clamp_f0):
    with open(path, "rb") as fh:
        return loads_afrm(fh.read(), clamp_f0)
