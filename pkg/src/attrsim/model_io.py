"""Versioned little-endian binary model files with bit-exact round trips.

Layout: magic ``ATNN``, format version u32, layer count u32, then per layer
``in_dim u32, out_dim u32, activation u8, row-major f64 weights, f64 biases``,
followed by the dropout rate as f64.
"""

from __future__ import annotations

import struct

import numpy as np

from .network import ACTIVATIONS, DenseLayer, DenseNetwork

MAGIC = b"ATNN"
FORMAT_VERSION = 1
_MAX_DIM = 1 << 24  # sanity bound against corrupted headers


class ModelFormatError(ValueError):
    """Bad magic, version, truncation, or inconsistent dimensions."""


def save_model(net: DenseNetwork, path) -> None:
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", FORMAT_VERSION, len(net.layers)))
        for layer in net.layers:
            act = ACTIVATIONS.index(layer.activation)
            fh.write(struct.pack("<IIB", layer.in_dim, layer.out_dim, act))
            fh.write(np.ascontiguousarray(layer.weights, dtype="<f8").tobytes())
            fh.write(np.ascontiguousarray(layer.bias, dtype="<f8").tobytes())
        fh.write(struct.pack("<d", net.dropout_rate))


def _read_exact(fh, count: int, what: str) -> bytes:
    data = fh.read(count)
    if len(data) != count:
        raise ModelFormatError(f"truncated file while reading {what}")
    return data


def load_model(path) -> DenseNetwork:
    with open(path, "rb") as fh:
        if _read_exact(fh, 4, "magic") != MAGIC:
            raise ModelFormatError("not a model file (bad magic)")
        version, n_layers = struct.unpack("<II", _read_exact(fh, 8, "header"))
        if version != FORMAT_VERSION:
            raise ModelFormatError(f"unsupported format version {version}")
        if n_layers == 0:
            raise ModelFormatError("model file declares zero layers")
        layers = []
        for i in range(n_layers):
            in_dim, out_dim, act = struct.unpack("<IIB", _read_exact(fh, 9, f"layer {i} header"))
            if not (0 < in_dim <= _MAX_DIM and 0 < out_dim <= _MAX_DIM):
                raise ModelFormatError(f"layer {i} has implausible dims {in_dim}x{out_dim}")
            if act >= len(ACTIVATIONS):
                raise ModelFormatError(f"layer {i} has unknown activation code {act}")
            w_bytes = _read_exact(fh, 8 * in_dim * out_dim, f"layer {i} weights")
            b_bytes = _read_exact(fh, 8 * out_dim, f"layer {i} biases")
            W = np.frombuffer(w_bytes, dtype="<f8").reshape(out_dim, in_dim).copy()
            b = np.frombuffer(b_bytes, dtype="<f8").copy()
            if layers and layers[-1].out_dim != in_dim:
                raise ModelFormatError(
                    f"layer {i} in_dim {in_dim} does not chain with previous "
                    f"out_dim {layers[-1].out_dim}"
                )
            layers.append(DenseLayer(W, b, ACTIVATIONS[act]))
        dropout_rate = struct.unpack("<d", _read_exact(fh, 8, "dropout rate"))[0]
        if fh.read(1):
            raise ModelFormatError("trailing bytes after model payload")
    return DenseNetwork(layers, dropout_rate)
