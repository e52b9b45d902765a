"""Frozen feed-forward network weights: file format and packing.

Weights are produced by an external training pipeline and imported
here; this module only loads, validates and flattens them for the
inference kernel.  File layout (little-endian):

    magic "NNW1" | n_layers u32
    per layer:
        in_dim u32 | out_dim u32 | activation u8 (0 none, 1 relu) |
        has_bn u8 |
        weights f32[out_dim * in_dim] (row-major, one row per output) |
        bias f32[out_dim] |
        if has_bn: gamma, beta, running_mean, running_var
                   (each f32[out_dim]) | bn_epsilon f32
    crc32 u32 over all preceding bytes

Recommended external training procedure for error-bounded use: add
uniform noise matched to the quantizer step to the network inputs so
training sees reconstruction-like data.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, CorruptContainerError

MAGIC = b"NNW1"

ACT_NONE = 0
ACT_RELU = 1


@dataclass
class Layer:
    weights: np.ndarray  # (out_dim, in_dim) float32
    bias: np.ndarray  # (out_dim,) float32
    activation: int = ACT_NONE
    # batch-norm inference parameters, all (out_dim,) float32
    gamma: np.ndarray | None = None
    beta: np.ndarray | None = None
    running_mean: np.ndarray | None = None
    running_var: np.ndarray | None = None
    bn_epsilon: float = 1e-3

    def __post_init__(self):
        self.weights = np.ascontiguousarray(self.weights, dtype=np.float32)
        self.bias = np.ascontiguousarray(self.bias, dtype=np.float32)
        if self.weights.ndim != 2 or self.bias.shape != (self.weights.shape[0],):
            raise ConfigError("layer weight/bias shapes inconsistent")
        for name in ("gamma", "beta", "running_mean", "running_var"):
            val = getattr(self, name)
            if val is not None:
                setattr(
                    self, name, np.ascontiguousarray(val, dtype=np.float32)
                )

    @property
    def has_bn(self) -> bool:
        return self.gamma is not None

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]


@dataclass
class NnWeights:
    layers: list[Layer] = field(default_factory=list)

    def validate(self, window_k: int) -> None:
        if not self.layers:
            raise ConfigError("network has no layers")
        if self.layers[0].in_dim != window_k:
            raise ConfigError(
                f"first layer expects {self.layers[0].in_dim} inputs, "
                f"window size is {window_k}"
            )
        if self.layers[-1].out_dim != 1:
            raise ConfigError("final layer must emit a single prediction")
        prev = self.layers[0].in_dim
        for i, lay in enumerate(self.layers):
            if lay.in_dim != prev:
                raise ConfigError(f"layer {i} input dim {lay.in_dim} != {prev}")
            if lay.has_bn and (
                lay.beta is None or lay.running_mean is None or lay.running_var is None
            ):
                raise ConfigError(f"layer {i} has incomplete batch-norm params")
            prev = lay.out_dim

    def max_width(self) -> int:
        return max(max(l.in_dim, l.out_dim) for l in self.layers)


def serialize(net: NnWeights) -> bytes:
    parts = [MAGIC, struct.pack("<I", len(net.layers))]
    for lay in net.layers:
        parts.append(
            struct.pack("<IIBB", lay.in_dim, lay.out_dim, lay.activation, int(lay.has_bn))
        )
        parts.append(lay.weights.astype("<f4").tobytes())
        parts.append(lay.bias.astype("<f4").tobytes())
        if lay.has_bn:
            for arr in (lay.gamma, lay.beta, lay.running_mean, lay.running_var):
                parts.append(arr.astype("<f4").tobytes())
            parts.append(struct.pack("<f", lay.bn_epsilon))
    body = b"".join(parts)
    return body + struct.pack("<I", zlib.crc32(body))


def deserialize(blob: bytes) -> NnWeights:
    if len(blob) < 12 or blob[:4] != MAGIC:
        raise CorruptContainerError("bad weight-file magic")
    body, (crc,) = blob[:-4], struct.unpack("<I", blob[-4:])
    if zlib.crc32(body) != crc:
        raise CorruptContainerError("weight-file checksum mismatch")
    pos = 4
    (n_layers,) = struct.unpack_from("<I", body, pos)
    pos += 4
    layers = []
    try:
        for _ in range(n_layers):
            in_dim, out_dim, act, has_bn = struct.unpack_from("<IIBB", body, pos)
            pos += 10
            nw = out_dim * in_dim

            def take(count):
                nonlocal pos
                end = pos + 4 * count
                if end > len(body):
                    raise CorruptContainerError("weight file truncated")
                arr = np.frombuffer(body, dtype="<f4", count=count, offset=pos).copy()
                pos = end
                return arr

            w = take(nw).reshape(out_dim, in_dim)
            b = take(out_dim)
            kw = {}
            if has_bn:
                kw = dict(
                    gamma=take(out_dim),
                    beta=take(out_dim),
                    running_mean=take(out_dim),
                    running_var=take(out_dim),
                )
                (kw["bn_epsilon"],) = struct.unpack_from("<f", body, pos)
                pos += 4
            layers.append(Layer(w, b, activation=act, **kw))
    except struct.error as exc:
        raise CorruptContainerError("weight file truncated") from exc
    if pos != len(body):
        raise CorruptContainerError("trailing bytes in weight file")
    return NnWeights(layers)


def save_weights(path, net: NnWeights) -> None:
    with open(path, "wb") as fh:
        fh.write(serialize(net))


def load_weights(path) -> NnWeights:
    with open(path, "rb") as fh:
        return deserialize(fh.read())


def pack_for_kernel(net: NnWeights):
    """Flatten layers into the parallel arrays the inference kernel reads."""
    n = len(net.layers)
    in_dims = np.zeros(n, np.int64)
    out_dims = np.zeros(n, np.int64)
    acts = np.zeros(n, np.uint8)
    bns = np.zeros(n, np.uint8)
    w_off = np.zeros(n, np.int64)
    b_off = np.zeros(n, np.int64)
    n_off = np.zeros(n, np.int64)
    bn_eps = np.zeros(n, np.float32)
    w_parts, b_parts, g_parts, be_parts, m_parts, v_parts = [], [], [], [], [], []
    wp = bp = np_ = 0
    for i, lay in enumerate(net.layers):
        in_dims[i], out_dims[i] = lay.in_dim, lay.out_dim
        acts[i], bns[i] = lay.activation, int(lay.has_bn)
        w_off[i], b_off[i], n_off[i] = wp, bp, np_
        w_parts.append(lay.weights.reshape(-1))
        b_parts.append(lay.bias)
        wp += lay.out_dim * lay.in_dim
        bp += lay.out_dim
        if lay.has_bn:
            g_parts.append(lay.gamma)
            be_parts.append(lay.beta)
            m_parts.append(lay.running_mean)
            v_parts.append(lay.running_var)
            bn_eps[i] = lay.bn_epsilon
            np_ += lay.out_dim

    def cat(parts):
        if not parts:
            return np.zeros(0, np.float32)
        return np.ascontiguousarray(np.concatenate(parts), dtype=np.float32)

    return (
        in_dims,
        out_dims,
        acts,
        bns,
        cat(w_parts),
        cat(b_parts),
        cat(g_parts),
        cat(be_parts),
        cat(m_parts),
        cat(v_parts),
        bn_eps,
        w_off,
        b_off,
        n_off,
    )


def empty_pack():
    """Placeholder network arrays for kernels running non-NN predictors."""
    z64 = np.zeros(0, np.int64)
    z8 = np.zeros(0, np.uint8)
    zf = np.zeros(0, np.float32)
    return (z64, z64, z8, z8, zf, zf, zf, zf, zf, zf, zf, z64, z64, z64)
