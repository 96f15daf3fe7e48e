"""NBRF weight files.

Layout (all integers little-endian u32 unless noted):

    magic "NBRF" | version = 1 | net kind (1 appearance, 2 importance)
    | input dim | layer count | layer widths ... | skip count
    | skip pairs (src, dst) ... | G row-major f32 | per layer:
      weights row-major f32, then biases f32

Round trips are bit exact for float32 models.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .fourier import FEATURE_DIM, N_FREQUENCIES, FourierFeatureMap
from .mlp import MlpModel

MAGIC = b"NBRF"
VERSION = 1


class WeightsError(ValueError):
    pass


def save_weights(model: MlpModel, path) -> None:
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", VERSION))
        f.write(struct.pack("<I", model.kind))
        f.write(struct.pack("<I", model.input_dim))
        f.write(struct.pack("<I", model.n_layers))
        for w in model.weights:
            f.write(struct.pack("<I", w.shape[1]))
        f.write(struct.pack("<I", len(model.skips)))
        for src, dst in model.skips:
            f.write(struct.pack("<II", src, dst))
        f.write(np.ascontiguousarray(model.fourier.matrix, dtype="<f4").tobytes())
        for w, b in zip(model.weights, model.biases):
            f.write(np.ascontiguousarray(w, dtype="<f4").tobytes())
            f.write(np.ascontiguousarray(b, dtype="<f4").tobytes())


def expected_file_size(model: MlpModel) -> int:
    """Header plus 4 bytes per stored float (G, weights, biases)."""
    header = 4 + 4 * 4 + 4 * model.n_layers + 4 + 8 * len(model.skips)
    floats = model.fourier.matrix.size + model.parameter_count()
    return header + 4 * floats


def load_weights(path) -> MlpModel:
    path = Path(path)
    data = path.read_bytes()
    if data[:4] != MAGIC:
        raise WeightsError(f"{path}: bad magic {data[:4]!r}")
    off = 4

    def read_u32(n=1):
        nonlocal off
        if off + 4 * n > len(data):
            raise WeightsError(f"{path}: truncated header")
        vals = struct.unpack_from(f"<{n}I", data, off)
        off += 4 * n
        return vals if n > 1 else vals[0]

    version = read_u32()
    if version != VERSION:
        raise WeightsError(f"{path}: unsupported version {version}")
    kind = read_u32()
    input_dim = read_u32()
    n_layers = read_u32()
    widths = list(read_u32(n_layers)) if n_layers > 1 else [read_u32()]
    n_skips = read_u32()
    skips = []
    for _ in range(n_skips):
        src, dst = read_u32(2)
        skips.append((src, dst))

    def read_f32(count, shape):
        nonlocal off
        nbytes = 4 * count
        if off + nbytes > len(data):
            raise WeightsError(f"{path}: truncated payload")
        arr = np.frombuffer(data, dtype="<f4", count=count, offset=off).reshape(shape)
        off += nbytes
        return arr.copy()

    g = read_f32(N_FREQUENCIES * input_dim, (N_FREQUENCIES, input_dim))
    weights, biases = [], []
    d_prev = FEATURE_DIM
    for w_out in widths:
        weights.append(read_f32(d_prev * w_out, (d_prev, w_out)))
        biases.append(read_f32(w_out, (w_out,)))
        d_prev = w_out
    if off != len(data):
        raise WeightsError(f"{path}: {len(data) - off} trailing bytes")
    return MlpModel(
        fourier=FourierFeatureMap(g), weights=weights, biases=biases,
        skips=skips, kind=kind,
    )
