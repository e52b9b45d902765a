"""Container format and the symbol-by-symbol encode/decode pipeline.

Container layout (all integers little-endian, no padding):

    magic "LFZR" | version u8 | crc32 u32 (over everything after it) |
    epsilon f64 | window_k u32 | predictor_id u8 | v u32 | n u64 |
    entropy_codec_id u8 | blob_len u32 | predictor parameter blob |
    per-variable payloads

Predictor blobs: NLMS carries (mu f64, reg f64, multivariate u8) so the
decoder runs the identical filter; NN embeds the full weight file so
containers are self-contained; last-value and CA carry nothing.

Per-variable payload (predictors 0..2):

    u64 len | entropy-coded low plane | u64 len | entropy-coded high
    plane | u64 outlier count | outlier float32 bits in order

CA payload (predictor 3):

    u64 retained count | u64 raw varint byte count |
    u64 len | entropy-coded delta-varint index plane |
    u64 len | entropy-coded float32 value plane

Epsilon is stored as float64 bits even though samples are float32, so a
user-specified bound like 1e-3 survives exactly.
"""

from __future__ import annotations

import hashlib
import struct
import zlib
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from . import ca as camod
from . import nn as nnmod
from ._kernels import (
    PRED_LAST,
    PRED_NLMS,
    PRED_NN,
    _decode_channel,
    _decode_multi,
    _encode_channel,
    _encode_multi,
)
from .entropy import (
    CODEC_IDS,
    CODEC_NAMES,
    entropy_decode,
    entropy_encode,
    merge_planes,
    split_planes,
)
from .errors import ConfigError, CorruptContainerError
from .predictors import DEFAULT_MU, DEFAULT_REG, PREDICTOR_IDS, PREDICTOR_NAMES
from .series import TimeSeries

MAGIC = b"LFZR"
VERSION = 1

_HDR = struct.Struct("<dIBIQBI")
_NLMS_BLOB = struct.Struct("<ddB")


@dataclass
class CodecConfig:
    """User-facing knobs; epsilon is the only required one."""

    epsilon: float
    window_k: int = 32
    predictor: str = "nlms"
    multivariate: bool = False
    entropy_codec: str = "rc1"
    nlms_mu: float = DEFAULT_MU
    nlms_reg: float = DEFAULT_REG
    nn_weight_path: str | None = None

    def validate(self) -> None:
        eps = float(self.epsilon)
        if not (eps > 0) or not np.isfinite(eps):
            raise ConfigError(
                "epsilon must be a positive finite number; for epsilon = 0 "
                "use a lossless compressor instead"
            )
        if int(self.window_k) < 1:
            raise ConfigError("window size must be >= 1")
        if self.predictor not in PREDICTOR_NAMES:
            raise ConfigError(f"unknown predictor {self.predictor!r}")
        if self.entropy_codec not in CODEC_NAMES:
            raise ConfigError(f"unknown entropy codec {self.entropy_codec!r}")
        if self.predictor == "nn" and not self.nn_weight_path:
            raise ConfigError("predictor 'nn' requires nn_weight_path")
        if self.multivariate and self.predictor != "nlms":
            raise ConfigError("multivariate mode is only defined for NLMS")
        if not (self.nlms_reg > 0):
            raise ConfigError("NLMS regularizer must be positive")


@dataclass
class ContainerHeader:
    epsilon: float
    window_k: int
    predictor: str
    v: int
    n: int
    entropy_codec: str
    blob: bytes = field(repr=False, default=b"")

    @property
    def multivariate(self) -> bool:
        if self.predictor == "nlms" and len(self.blob) == _NLMS_BLOB.size:
            return bool(_NLMS_BLOB.unpack(self.blob)[2])
        return False


class _Reader:
    def __init__(self, data: bytes, pos: int = 0):
        self.data = data
        self.pos = pos

    def take(self, count: int) -> bytes:
        end = self.pos + count
        if count < 0 or end > len(self.data):
            raise CorruptContainerError("container truncated")
        chunk = self.data[self.pos : end]
        self.pos = end
        return chunk

    def u64(self) -> int:
        return struct.unpack("<Q", self.take(8))[0]

    def done(self) -> bool:
        return self.pos == len(self.data)


@njit(cache=True)
def _varint_encode(deltas):
    out = np.empty(deltas.size * 10, np.uint8)
    pos = 0
    for i in range(deltas.size):
        d = deltas[i]
        while d >= 0x80:
            out[pos] = (d & 0x7F) | 0x80
            pos += 1
            d >>= 7
        out[pos] = d
        pos += 1
    return out[:pos]


@njit(cache=True)
def _varint_decode(buf, count):
    out = np.empty(count, np.int64)
    pos = 0
    m = buf.size
    for i in range(count):
        val = 0
        shift = 0
        while True:
            if pos >= m or shift > 63:
                return out[:i], pos, False
            b = buf[pos]
            pos += 1
            val |= np.int64(b & 0x7F) << shift
            if b < 0x80:
                break
            shift += 7
        out[i] = val
    return out, pos, False if pos != m else True


def _nn_pack_for(config: CodecConfig):
    net = nnmod.load_weights(config.nn_weight_path)
    net.validate(int(config.window_k))
    return net


def _kernel_args(pred_id: int, k: int, net) -> tuple:
    if pred_id == PRED_NN:
        pack = nnmod.pack_for_kernel(net)
        width = max(net.max_width(), k)
    else:
        pack = nnmod.empty_pack()
        width = k
    buf_a = np.empty(width, np.float32)
    buf_b = np.empty(width, np.float32)
    return (*pack, buf_a, buf_b)


_NO_CKPT = (
    np.zeros(0, np.int64),
    np.zeros((0, 1), np.float32),
    np.zeros((0, 1), np.float32),
)


def _pack_channel_payload(idx: np.ndarray, outliers: np.ndarray, cid: int) -> bytes:
    low, high = split_planes(idx)
    enc_low = entropy_encode(low, cid)
    enc_high = entropy_encode(high, cid)
    return b"".join(
        (
            struct.pack("<Q", len(enc_low)),
            enc_low,
            struct.pack("<Q", len(enc_high)),
            enc_high,
            struct.pack("<Q", outliers.size),
            outliers.astype("<f4", copy=False).tobytes(),
        )
    )


def _pack_ca_payload(x: np.ndarray, eps: float, cid: int) -> bytes:
    indices, values = camod.ca_compress(x, eps)
    if indices.size:
        deltas = np.empty(indices.size, np.int64)
        deltas[0] = indices[0]
        deltas[1:] = np.diff(indices)
    else:
        deltas = np.zeros(0, np.int64)
    vb = _varint_encode(deltas)
    enc_idx = entropy_encode(vb, cid)
    val_bytes = np.frombuffer(values.astype("<f4", copy=False).tobytes(), np.uint8)
    enc_val = entropy_encode(val_bytes, cid)
    return b"".join(
        (
            struct.pack("<QQ", indices.size, vb.size),
            struct.pack("<Q", len(enc_idx)),
            enc_idx,
            struct.pack("<Q", len(enc_val)),
            enc_val,
        )
    )


def encode(series: TimeSeries, config: CodecConfig) -> bytes:
    """Compress a series into a self-contained container."""
    config.validate()
    eps = float(config.epsilon)
    k = int(config.window_k)
    n, v = series.n, series.v
    x = series.values
    pred_id = PREDICTOR_NAMES[config.predictor]
    cid = CODEC_NAMES[config.entropy_codec]

    blob = b""
    payloads = []
    if config.predictor == "ca":
        for j in range(v):
            payloads.append(_pack_ca_payload(series.column(j), eps, cid))
    elif config.multivariate and v >= 1:
        blob = _NLMS_BLOB.pack(config.nlms_mu, config.nlms_reg, 1)
        if n > 0:
            idx, _, outliers, n_out = _encode_multi(
                x, eps, k, config.nlms_mu, config.nlms_reg
            )
        for j in range(v):
            col_idx = (
                np.ascontiguousarray(idx[:, j]) if n > 0 else np.zeros(0, np.uint16)
            )
            col_out = (
                np.ascontiguousarray(outliers[: n_out[j], j])
                if n > 0
                else np.zeros(0, np.float32)
            )
            payloads.append(_pack_channel_payload(col_idx, col_out, cid))
    else:
        if config.predictor == "nlms":
            blob = _NLMS_BLOB.pack(config.nlms_mu, config.nlms_reg, 0)
        net = _nn_pack_for(config) if config.predictor == "nn" else None
        if config.predictor == "nn":
            blob = nnmod.serialize(net)
        for j in range(v):
            idx, _, outliers = _encode_channel(
                series.column(j), eps, k, config.nlms_mu, config.nlms_reg,
                pred_id, *_kernel_args(pred_id, k, net), *_NO_CKPT,
            )
            payloads.append(_pack_channel_payload(idx, outliers, cid))

    body = b"".join(
        (
            _HDR.pack(eps, k, pred_id, v, n, cid, len(blob)),
            blob,
            *payloads,
        )
    )
    return MAGIC + bytes([VERSION]) + struct.pack("<I", zlib.crc32(body)) + body


def read_header(data: bytes) -> ContainerHeader:
    """Validate framing and parse the header; does not touch payloads."""
    if len(data) < 9 or data[:4] != MAGIC:
        raise CorruptContainerError("bad container magic")
    if data[4] != VERSION:
        raise CorruptContainerError(f"unsupported container version {data[4]}")
    (crc,) = struct.unpack_from("<I", data, 5)
    body = data[9:]
    if zlib.crc32(body) != crc:
        raise CorruptContainerError("container checksum mismatch")
    if len(body) < _HDR.size:
        raise CorruptContainerError("container truncated")
    eps, k, pred_id, v, n, cid, blob_len = _HDR.unpack_from(body, 0)
    if pred_id not in PREDICTOR_IDS:
        raise CorruptContainerError(f"unknown predictor id {pred_id}")
    if cid not in CODEC_IDS:
        raise CorruptContainerError(f"unknown entropy codec id {cid}")
    if not (eps > 0) or not np.isfinite(eps):
        raise CorruptContainerError("invalid epsilon in header")
    if v < 1 and n > 0:
        raise CorruptContainerError("invalid variable count in header")
    rd = _Reader(body, _HDR.size)
    blob = rd.take(blob_len)
    return ContainerHeader(eps, k, PREDICTOR_IDS[pred_id], max(v, 1), n, CODEC_IDS[cid], blob)


def _unpack_channel_payload(rd: _Reader, n: int, cid: int):
    enc_low = rd.take(rd.u64())
    enc_high = rd.take(rd.u64())
    n_out = rd.u64()
    if n_out > n:
        raise CorruptContainerError("outlier count exceeds series length")
    out_bytes = rd.take(4 * n_out)
    low = entropy_decode(enc_low, n, cid)
    high = entropy_decode(enc_high, n, cid)
    idx = merge_planes(low, high)
    outliers = np.frombuffer(out_bytes, dtype="<f4").copy()
    if int(np.count_nonzero(idx == 65535)) != n_out:
        raise CorruptContainerError("outlier count disagrees with index stream")
    return idx, outliers


def _decode_ca_channel(rd: _Reader, n: int, eps: float, cid: int) -> np.ndarray:
    n_points = rd.u64()
    vb_len = rd.u64()
    if n_points > n or vb_len > 10 * n_points:
        raise CorruptContainerError("implausible retained-point counts")
    enc_idx = rd.take(rd.u64())
    enc_val = rd.take(rd.u64())
    vb = entropy_decode(enc_idx, vb_len, cid)
    deltas, _, ok = _varint_decode(vb, n_points)
    if not ok:
        raise CorruptContainerError("corrupt retained-point index stream")
    if n_points and np.any(deltas[1:] <= 0):
        raise CorruptContainerError("retained indices must strictly increase")
    indices = np.cumsum(deltas) if n_points else np.zeros(0, np.int64)
    val_bytes = entropy_decode(enc_val, 4 * n_points, cid)
    values = np.frombuffer(val_bytes.tobytes(), dtype="<f4").copy()
    return camod.ca_decompress(indices, values, n)


def decode(data: bytes) -> TimeSeries:
    """Decompress a container back into a TimeSeries."""
    hdr = read_header(data)
    n, v, k = hdr.n, hdr.v, hdr.window_k
    eps = hdr.epsilon
    cid = CODEC_NAMES[hdr.entropy_codec]
    rd = _Reader(data[9:], _HDR.size + len(hdr.blob))

    if hdr.predictor == "ca":
        cols = [_decode_ca_channel(rd, n, eps, cid) for _ in range(v)]
        if not rd.done():
            raise CorruptContainerError("trailing bytes in container")
        return TimeSeries(np.stack(cols, axis=1) if n else np.zeros((0, v), np.float32))

    mu, reg = DEFAULT_MU, DEFAULT_REG
    multivariate = False
    net = None
    if hdr.predictor == "nlms":
        if len(hdr.blob) != _NLMS_BLOB.size:
            raise CorruptContainerError("bad NLMS parameter blob")
        mu, reg, mv = _NLMS_BLOB.unpack(hdr.blob)
        if not (reg > 0) or not np.isfinite(mu):
            raise CorruptContainerError("invalid NLMS parameters in header")
        multivariate = bool(mv)
    elif hdr.predictor == "nn":
        net = nnmod.deserialize(hdr.blob)
        net.validate(k)

    channels = [_unpack_channel_payload(rd, n, cid) for _ in range(v)]
    if not rd.done():
        raise CorruptContainerError("trailing bytes in container")

    if multivariate:
        idx = np.empty((n, v), np.uint16)
        starts = np.zeros(v + 1, np.int64)
        for j, (col_idx, col_out) in enumerate(channels):
            idx[:, j] = col_idx
            starts[j + 1] = starts[j] + col_out.size
        out_flat = (
            np.concatenate([c[1] for c in channels])
            if starts[-1]
            else np.zeros(0, np.float32)
        )
        if n == 0:
            return TimeSeries(np.zeros((0, v), np.float32))
        recon, ok = _decode_multi(idx, out_flat, starts, n, v, eps, k, mu, reg)
        if not ok:
            raise CorruptContainerError("outlier stream exhausted during decode")
        return TimeSeries(recon)

    pred_id = PREDICTOR_NAMES[hdr.predictor]
    cols = []
    for col_idx, col_out in channels:
        recon, oi, ok = _decode_channel(
            col_idx, col_out, n, eps, k, mu, reg, pred_id,
            *_kernel_args(pred_id, k, net), *_NO_CKPT,
        )
        if not ok or oi != col_out.size:
            raise CorruptContainerError("outlier stream exhausted during decode")
        cols.append(recon)
    return TimeSeries(np.stack(cols, axis=1) if n else np.zeros((0, v), np.float32))


def _digest_rows(ckpt_w: np.ndarray, ckpt_win: np.ndarray) -> list[str]:
    out = []
    for i in range(ckpt_w.shape[0]):
        h = hashlib.sha256()
        h.update(ckpt_w[i].tobytes())
        h.update(ckpt_win[i].tobytes())
        out.append(h.hexdigest())
    return out


def encoder_state_digests(series: TimeSeries, config: CodecConfig, timesteps) -> list[str]:
    """Predictor-state digests after each sampled encoder timestep.

    Univariate containers only; used to assert encoder/decoder state
    symmetry without exposing raw filter internals.
    """
    config.validate()
    if series.v != 1 or config.multivariate:
        raise ConfigError("state digests are defined for univariate mode")
    ts = np.asarray(sorted(timesteps), np.int64)
    k = int(config.window_k)
    ckpt_w = np.zeros((ts.size, k), np.float32)
    ckpt_win = np.zeros((ts.size, k), np.float32)
    pred_id = PREDICTOR_NAMES[config.predictor]
    net = _nn_pack_for(config) if config.predictor == "nn" else None
    _encode_channel(
        series.column(0), float(config.epsilon), k, config.nlms_mu, config.nlms_reg,
        pred_id, *_kernel_args(pred_id, k, net), ts, ckpt_w, ckpt_win,
    )
    return _digest_rows(ckpt_w, ckpt_win)


def decoder_state_digests(data: bytes, timesteps) -> list[str]:
    """Predictor-state digests after each sampled decoder timestep."""
    hdr = read_header(data)
    if hdr.v != 1 or hdr.multivariate:
        raise ConfigError("state digests are defined for univariate mode")
    if hdr.predictor == "ca":
        raise ConfigError("CA containers carry no predictor state")
    ts = np.asarray(sorted(timesteps), np.int64)
    k = hdr.window_k
    ckpt_w = np.zeros((ts.size, k), np.float32)
    ckpt_win = np.zeros((ts.size, k), np.float32)
    mu, reg = DEFAULT_MU, DEFAULT_REG
    net = None
    if hdr.predictor == "nlms":
        mu, reg, _ = _NLMS_BLOB.unpack(hdr.blob)
    elif hdr.predictor == "nn":
        net = nnmod.deserialize(hdr.blob)
    cid = CODEC_NAMES[hdr.entropy_codec]
    rd = _Reader(data[9:], _HDR.size + len(hdr.blob))
    col_idx, col_out = _unpack_channel_payload(rd, hdr.n, cid)
    pred_id = PREDICTOR_NAMES[hdr.predictor]
    _decode_channel(
        col_idx, col_out, hdr.n, hdr.epsilon, k, mu, reg, pred_id,
        *_kernel_args(pred_id, k, net), ts, ckpt_w, ckpt_win,
    )
    return _digest_rows(ckpt_w, ckpt_win)
