"""NNBG model files.

Layout (little-endian): magic ``NNBG``, u16 version, 32-byte sha256 of the
canonical topology, u8 payload flag (0 float32, 1 int8), u32-prefixed
topology JSON, u32-prefixed metadata JSON, u16 block count, then one payload
per dense block. Float payloads are ``u16 index, u32 count, float32[count]``;
8-bit payloads follow QuantizedBlock.pack.
"""

import json
import struct
from dataclasses import dataclass

import numpy as np

from ..errors import DigestMismatchError, ModelFileError
from .graph import build_graph
from .quantize import BLOCK_HEADER, QuantizedBlock, QuantizedWeights, load_flat, quantize
from .topology import GraphSpec

MAGIC = b"NNBG"
VERSION = 1
FLOAT32, INT8 = 0, 1
_HEAD = struct.Struct("<4sH32sB")
_FLOAT_BLOCK = struct.Struct("<HI")


@dataclass
class ModelFile:
    graph: object
    meta: dict
    quantized: QuantizedWeights = None   # set when the payload was 8-bit


def dumps_model(graph, meta=None, quantized=False, qweights=None):
    spec_text = graph.spec.canonical().encode("utf-8")
    meta_text = json.dumps(meta or {}, sort_keys=True).encode("utf-8")
    dense = [(i, n, b) for i, (n, b) in enumerate(graph.blocks.items()) if b.weights is not None]
    parts = [_HEAD.pack(MAGIC, VERSION, graph.spec.digest(), INT8 if quantized else FLOAT32),
             struct.pack("<I", len(spec_text)), spec_text,
             struct.pack("<I", len(meta_text)), meta_text,
             struct.pack("<H", len(dense))]
    if quantized:
        q = qweights or quantize(graph)
        parts.append(q.pack())
    else:
        for i, _, b in dense:
            flat = np.concatenate([b.weights.ravel(), b.bias.ravel()]).astype("<f4")
            parts.append(_FLOAT_BLOCK.pack(i, flat.size) + flat.tobytes())
    return b"".join(parts)


class _Reader:
    def __init__(self, data):
        self.data, self.pos = data, 0

    def take(self, n):
        if self.pos + n > len(self.data):
            raise ModelFileError("model file is truncated")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def unpack(self, st):
        return st.unpack(self.take(st.size))


def loads_model(data):
    r = _Reader(data)
    magic, version, digest, flag = r.unpack(_HEAD)
    if magic != MAGIC:
        raise ModelFileError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise ModelFileError(f"unsupported model version {version}")
    if flag not in (FLOAT32, INT8):
        raise ModelFileError(f"unknown payload flag {flag}")
    (n,) = r.unpack(struct.Struct("<I"))
    spec_text = r.take(n).decode("utf-8")
    (n,) = r.unpack(struct.Struct("<I"))
    meta = json.loads(r.take(n).decode("utf-8"))
    spec = GraphSpec.from_canonical(spec_text)
    if spec.digest() != digest:
        raise DigestMismatchError("topology digest does not match the embedded topology")
    graph = build_graph(spec, init=False)
    names = list(graph.blocks)
    (count,) = r.unpack(struct.Struct("<H"))
    qblocks = []
    for _ in range(count):
        if flag == FLOAT32:
            idx, size = r.unpack(_FLOAT_BLOCK)
            values = np.frombuffer(r.take(4 * size), dtype="<f4").astype(float)
        else:
            idx, size, scale, zp, const = r.unpack(BLOCK_HEADER)
            codes = np.frombuffer(r.take(size), dtype=np.uint8).copy()
            if idx >= len(names):
                raise ModelFileError(f"block index {idx} out of range")
            qb = QuantizedBlock(idx, names[idx], scale, zp, const, codes)
            qblocks.append(qb)
            values = qb.values()
        if idx >= len(names) or graph.blocks[names[idx]].weights is None:
            raise ModelFileError(f"payload for block index {idx}, which is not a dense block")
        load_flat(graph, names[idx], values)
    if r.pos != len(data):
        raise ModelFileError(f"{len(data) - r.pos} trailing bytes in model file")
    q = QuantizedWeights(qblocks, digest) if flag == INT8 else None
    return ModelFile(graph, meta, q)


def write_model(path, graph, meta=None, quantized=False, qweights=None):
    with open(path, "wb") as f:
        f.write(dumps_model(graph, meta, quantized, qweights))


def read_model(path, expected_digest=None):
    with open(path, "rb") as f:
        model = loads_model(f.read())
    if expected_digest is not None and model.graph.spec.digest() != expected_digest:
        raise DigestMismatchError(f"{path}: model topology differs from the expected topology")
    return model

