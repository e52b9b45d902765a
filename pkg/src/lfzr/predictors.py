"""Causal predictors over past reconstructions.

These classes are the reference, step-at-a-time form of the predictors;
the compiled loops in ``_kernels`` perform the identical float32
arithmetic in the same order, so both produce bit-identical prediction
sequences (asserted in the test suite).

Warmup rule: before the window holds k reconstructions the prediction
is the previous reconstruction, and 0.0 at the very first step.
Predictions are always finite: a non-finite filter output falls back to
the last finite reconstruction.
"""

from __future__ import annotations

import hashlib

import numpy as np

from . import nn as nnmod
from ._kernels import _nn_forward
from .errors import ConfigError

PREDICTOR_NAMES = {"last_value": 0, "nlms": 1, "nn": 2, "ca": 3}
PREDICTOR_IDS = {v: k for k, v in PREDICTOR_NAMES.items()}

DEFAULT_MU = 0.5
DEFAULT_REG = 1.0


def _finitize(value: np.float32, fallback: np.float32) -> np.float32:
    return value if np.isfinite(value) else fallback


class LastValuePredictor:
    """Baseline: predict the previous reconstruction."""

    def __init__(self, window_k: int = 32):
        self.window_k = window_k
        self._prev = np.float32(0.0)
        self.t = 0

    def predict(self) -> np.float32:
        return np.float32(0.0) if self.t == 0 else self._prev

    def update(self, x_hat) -> None:
        self._prev = _finitize(np.float32(x_hat), self._prev)
        self.t += 1


class NlmsPredictor:
    """Normalized LMS adaptive FIR filter over the last k reconstructions.

    The weight update uses the reconstruction (the decoder never sees
    the original), is normalized by the window energy plus a
    regularizer, and is discarded entirely if it would produce any
    non-finite weight.
    """

    def __init__(self, window_k: int = 32, mu: float = DEFAULT_MU, reg: float = DEFAULT_REG):
        if window_k < 1:
            raise ConfigError("window size must be >= 1")
        self.window_k = window_k
        self.mu = np.float32(mu)
        self.reg = np.float32(reg)
        self.weights = np.zeros(window_k, np.float32)
        self.window = np.zeros(window_k, np.float32)  # oldest first
        self.t = 0
        self._prev_fin = np.float32(0.0)
        self._last_y = np.float32(0.0)

    def predict(self) -> np.float32:
        if self.t == 0:
            y = np.float32(0.0)
        elif self.t < self.window_k:
            y = self.window[self.window_k - 1]
        else:
            acc = np.float32(0.0)
            for i in range(self.window_k):
                acc = acc + self.weights[i] * self.window[i]
            y = _finitize(acc, self._prev_fin)
        self._last_y = y
        return y

    def update(self, x_hat) -> None:
        k = self.window_k
        xh = np.float32(x_hat)
        if self.t >= k:
            e = xh - self._last_y
            norm = np.float32(0.0)
            for i in range(k):
                norm = norm + self.window[i] * self.window[i]
            g = (self.mu * e) / (self.reg + norm)
            cand = np.empty(k, np.float32)
            ok = True
            for i in range(k):
                cand[i] = self.weights[i] + g * self.window[i]
                if not np.isfinite(cand[i]):
                    ok = False
            if ok:
                self.weights = cand
        hv = _finitize(xh, self._prev_fin)
        self.window[:-1] = self.window[1:]
        self.window[-1] = hv
        self._prev_fin = hv
        self.t += 1

    def state_digest(self) -> str:
        h = hashlib.sha256()
        h.update(self.weights.tobytes())
        h.update(self.window.tobytes())
        return h.hexdigest()


def nn_forward(window: np.ndarray, net: nnmod.NnWeights) -> np.float32:
    """Inference-only forward pass with frozen weights.

    Batch norm uses the stored running statistics; no weight is ever
    updated during compression.
    """
    win = np.ascontiguousarray(window, dtype=np.float32)
    net.validate(win.size)
    pack = nnmod.pack_for_kernel(net)
    width = max(net.max_width(), win.size)
    buf_a = np.empty(width, np.float32)
    buf_b = np.empty(width, np.float32)
    return _nn_forward(win, win.size, win.size, *pack, buf_a, buf_b)


class NnPredictor:
    """Frozen feed-forward network over the last k reconstructions."""

    def __init__(self, net: nnmod.NnWeights, window_k: int = 32):
        net.validate(window_k)
        self.net = net
        self.window_k = window_k
        self._pack = nnmod.pack_for_kernel(net)
        width = max(net.max_width(), window_k)
        self._buf_a = np.empty(width, np.float32)
        self._buf_b = np.empty(width, np.float32)
        self.window = np.zeros(window_k, np.float32)
        self.t = 0
        self._prev_fin = np.float32(0.0)

    def predict(self) -> np.float32:
        if self.t == 0:
            return np.float32(0.0)
        if self.t < self.window_k:
            return self.window[self.window_k - 1]
        y = _nn_forward(
            self.window, self.window_k, self.window_k,
            *self._pack, self._buf_a, self._buf_b,
        )
        return _finitize(y, self._prev_fin)

    def update(self, x_hat) -> None:
        hv = _finitize(np.float32(x_hat), self._prev_fin)
        self.window[:-1] = self.window[1:]
        self.window[-1] = hv
        self._prev_fin = hv
        self.t += 1


def multivariate_window(hist: np.ndarray, t: int, j: int, k: int) -> np.ndarray:
    """Gather the joint prediction window for variable j at timestep t.

    Taps are split variable-major with floor(k/v) per variable and the
    remainder assigned to the target variable; variables before j
    contribute values through time t, the rest through t-1.  Layout is
    variable-major, newest-last, matching the compiled kernels.
    """
    n, v = hist.shape
    base = k // v
    rem = k - base * v
    out = np.empty(k, np.float32)
    p = 0
    for i in range(v):
        m = base + rem if i == j else base
        end = t + 1 if i < j else t
        for s in range(end - m, end):
            out[p] = hist[s, i]
            p += 1
    return out
