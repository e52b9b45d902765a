"""Uniform scalar quantization of prediction residuals.

The residual is quantized with step 2*epsilon onto 65535 regular bins;
one 16-bit code (65535) is reserved for outliers.  Raw codes 0..65534
map to signed indices -32767..32767 via an offset of 32767.

Quantization arithmetic is performed in float64 so the epsilon bound
is not eroded by float32 rounding; the caller rounds the final
reconstruction to float32 once and falls back to the outlier path if
that rounding breaks the bound.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

RAW_OUTLIER = 65535
INDEX_OFFSET = 32767
MAX_INDEX = 32767


def signed_to_raw(index: int) -> int:
    if not -MAX_INDEX <= index <= MAX_INDEX:
        raise ValueError(f"signed index {index} outside quantizer range")
    return index + INDEX_OFFSET


def raw_to_signed(raw: int) -> int:
    if not 0 <= raw <= 65534:
        raise ValueError(f"raw code {raw} is not a regular bin")
    return raw - INDEX_OFFSET


def quantize(delta: float, epsilon: float) -> int:
    """Map a residual to a raw 16-bit code (RAW_OUTLIER if out of range).

    Rounding is floor(q + 0.5) on the float64 quotient: ties away from
    -infinity, fixed for determinism.  Non-finite residuals always map
    to the outlier code.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    d = float(delta)
    if not math.isfinite(d):
        return RAW_OUTLIER
    eps = float(epsilon)
    step = 2.0 * eps  # doubling is exact, so the true half-bin width is eps
    q = d / step
    qr = math.floor(q + 0.5)
    err = abs(qr * step - d)
    if err > eps * (1.0 - 1e-9):
        # near a bin boundary the float64 division and product rounding
        # can land one bin off; resolve the nearest bin exactly
        df, sf, ef = Fraction(d), Fraction(step), Fraction(eps)
        if abs(df - qr * sf) > ef:
            qr += 1 if df > qr * sf else -1
    if -MAX_INDEX <= qr <= MAX_INDEX:
        return int(qr) + INDEX_OFFSET
    return RAW_OUTLIER


def dequantize(raw: int, epsilon: float) -> float:
    """Reconstruct the residual for a regular bin, in float64."""
    if raw == RAW_OUTLIER:
        raise ValueError("dequantize called with the outlier code")
    return float(raw_to_signed(raw)) * (2.0 * float(epsilon))


def encode_step(x_t: float, y_t: float, epsilon: float):
    """One encoder step: quantize the residual x_t - y_t.

    Returns (raw_code, x_hat) where x_hat is the float32 reconstruction.
    The outlier path stores x_t verbatim; it also absorbs non-finite
    inputs and the rare case where float32 rounding of the regular
    reconstruction would break |x_hat - x_t| <= epsilon.
    """
    eps = float(epsilon)
    x64 = float(np.float32(x_t))
    y64 = float(np.float32(y_t))
    if math.isfinite(x64):
        raw = quantize(x64 - y64, eps)
        if raw != RAW_OUTLIER:
            xh = np.float32(y64 + dequantize(raw, eps))
            if abs(float(xh) - x64) <= eps:
                return raw, xh
    return RAW_OUTLIER, np.float32(x_t)
