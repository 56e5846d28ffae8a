"""8-bit affine weight quantization, one (scale, zero point) pair per dense block."""

import struct
from dataclasses import dataclass

import numpy as np

from ..errors import ModelFileError
from .graph import build_graph

# u16 block index, u32 value count, f64 scale, i32 zero point, f64 constant
BLOCK_HEADER = struct.Struct("<HIdid")
LEVELS = 256


@dataclass
class QuantizedBlock:
    index: int
    name: str
    scale: float
    zero_point: int
    constant: float   # value of every weight when scale == 0
    codes: np.ndarray  # uint8, weights row-major followed by biases

    def values(self):
        if self.scale == 0.0:
            return np.full(self.codes.size, self.constant)
        return self.scale * (self.codes.astype(np.int64) - self.zero_point)

    def pack(self):
        return (BLOCK_HEADER.pack(self.index, self.codes.size, self.scale, self.zero_point,
                                  self.constant) + self.codes.astype(np.uint8).tobytes())


@dataclass
class QuantizedWeights:
    blocks: list
    digest: bytes

    def nbytes(self):
        """Serialized size of the per-block payloads, headers included."""
        return sum(BLOCK_HEADER.size + b.codes.size for b in self.blocks)

    def pack(self):
        return b"".join(b.pack() for b in self.blocks)


def quantize_array(values):
    """(scale, zero_point, constant, codes) for a flat float array."""
    values = np.asarray(values, dtype=float).ravel()
    lo, hi = float(values.min()), float(values.max())
    if hi == lo:
        return 0.0, 0, lo, np.zeros(values.size, dtype=np.uint8)
    scale = (hi - lo) / (LEVELS - 1)
    zero_point = int(round(-lo / scale))
    codes = np.clip(np.round(values / scale + zero_point), 0, LEVELS - 1).astype(np.uint8)
    return scale, zero_point, 0.0, codes


def _flat(block):
    return np.concatenate([block.weights.ravel(), block.bias.ravel()])


def quantize(graph):
    out = []
    for i, (name, b) in enumerate(graph.blocks.items()):
        if b.weights is None:
            continue
        scale, zp, const, codes = quantize_array(_flat(b))
        out.append(QuantizedBlock(i, name, scale, zp, const, codes))
    return QuantizedWeights(out, graph.spec.digest())


def load_flat(graph, name, values):
    b = graph.blocks[name]
    n_w = b.weights.size
    if values.size != n_w + b.bias.size:
        raise ModelFileError(f"block {name!r}: payload has {values.size} values, "
                             f"expected {n_w + b.bias.size}")
    b.weights[:] = values[:n_w].reshape(b.weights.shape)
    b.bias[:] = values[n_w:]


def dequantize(q, spec):
    """Runnable float graph from quantized weights and the matching topology."""
    graph = build_graph(spec, init=False)
    for qb in q.blocks:
        load_flat(graph, qb.name, qb.values())
    return graph
