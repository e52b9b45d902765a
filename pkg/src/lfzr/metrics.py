"""Compression/distortion metrics.

The ratio baseline is raw float32 storage (4 bytes per value), so
lossless and lossy figures share a denominator.  Error statistics are
computed in float64 over finite samples; non-finite samples must match
bit-exactly and are excluded from the error averages.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .series import TimeSeries


@dataclass
class Metrics:
    ratio: float
    max_abs_err: float
    mean_abs_err: float
    rmse: float
    n: int
    v: int
    compressed_bytes: int
    encode_tps: float = 0.0  # timesteps per second; 0 when not measured
    decode_tps: float = 0.0

    @property
    def uncompressed_bytes(self) -> int:
        return 4 * self.n * self.v


def compute_metrics(
    original: TimeSeries,
    reconstructed: TimeSeries,
    compressed_size: int,
    encode_tps: float = 0.0,
    decode_tps: float = 0.0,
) -> Metrics:
    a = original.values
    b = reconstructed.values
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    finite = np.isfinite(a)
    if not np.array_equal(
        a[~finite].view(np.uint32), b[~finite].view(np.uint32)
    ):
        raise ValueError("non-finite samples not reproduced bit-exactly")
    err = np.abs(a[finite].astype(np.float64) - b[finite].astype(np.float64))
    if err.size:
        max_err = float(err.max())
        mae = float(err.mean())
        rmse = float(np.sqrt(np.mean(err * err)))
    else:
        max_err = mae = rmse = 0.0
    raw = 4 * original.n * original.v
    ratio = raw / compressed_size if compressed_size > 0 else 0.0
    return Metrics(
        ratio=ratio,
        max_abs_err=max_err,
        mean_abs_err=mae,
        rmse=rmse,
        n=original.n,
        v=original.v,
        compressed_bytes=compressed_size,
        encode_tps=encode_tps,
        decode_tps=decode_tps,
    )


def max_abs_error(original: TimeSeries, reconstructed: TimeSeries) -> float:
    """Independent float64 pass over both arrays; ignores non-finite."""
    a = original.values
    b = reconstructed.values
    finite = np.isfinite(a)
    if not finite.any():
        return 0.0
    return float(
        np.max(np.abs(a[finite].astype(np.float64) - b[finite].astype(np.float64)))
    )
