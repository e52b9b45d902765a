"""Critical-aperture baseline: retain points, interpolate linearly.

A greedy slope-corridor pass keeps a subset of samples such that the
straight line between consecutive retained points passes within epsilon
of every dropped sample.  Comparisons are <= (a point exactly on the
corridor edge stays inside), corridor arithmetic is float64.

Two post-passes follow the greedy sweep:
  * repair: the decompressor rounds interpolants to float32; near the
    float32 precision limit that rounding can break the bound, so any
    violating sample is force-retained and the check repeats;
  * prune: retained interior points whose removal keeps the bound are
    dropped (greedy sweeps until a fixpoint), so no single retained
    point is redundant.

Non-finite samples are retained verbatim and break the segment: their
neighbours are retained too, so no interpolation ever spans a
non-finite endpoint.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .errors import CorruptContainerError, DataFormatError


@njit(cache=True)
def _greedy_keep(x, eps):
    n = x.size
    keep = np.zeros(n, np.uint8)
    if n == 0:
        return keep
    keep[0] = 1
    keep[n - 1] = 1
    anchor = 0
    va = np.float64(x[0])
    lo = -np.inf
    hi = np.inf
    for t in range(1, n):
        if not np.isfinite(va):
            # fresh segment after a non-finite point
            keep[t] = 1
            anchor = t
            va = np.float64(x[t])
            lo = -np.inf
            hi = np.inf
            continue
        xt = np.float64(x[t])
        if not np.isfinite(xt):
            keep[t - 1] = 1
            keep[t] = 1
            anchor = t
            va = xt
            lo = -np.inf
            hi = np.inf
            continue
        dt = np.float64(t - anchor)
        slope = (xt - va) / dt
        if lo <= slope <= hi:
            l2 = (xt - eps - va) / dt
            h2 = (xt + eps - va) / dt
            if l2 > lo:
                lo = l2
            if h2 < hi:
                hi = h2
            continue
        # corridor closed: previous point becomes the new anchor
        keep[t - 1] = 1
        anchor = t - 1
        va = np.float64(x[t - 1])
        lo = (xt - eps - va) / 1.0
        hi = (xt + eps - va) / 1.0
    return keep


@njit(cache=True)
def _interpolate(indices, values, n):
    out = np.empty(n, np.float32)
    for p in range(indices.size - 1):
        i1 = indices[p]
        i2 = indices[p + 1]
        v1 = np.float64(values[p])
        v2 = np.float64(values[p + 1])
        out[i1] = values[p]
        span = np.float64(i2 - i1)
        for s in range(i1 + 1, i2):
            out[s] = np.float32(v1 + (v2 - v1) * (np.float64(s - i1) / span))
    if indices.size > 0:
        out[indices[-1]] = values[indices.size - 1]
    return out


@njit(cache=True)
def _repair(x, keep, eps):
    """Force-retain samples the float32 interpolation pushes past eps."""
    n = x.size
    changed = True
    while changed:
        changed = False
        idx_count = 0
        for i in range(n):
            if keep[i] == 1:
                idx_count += 1
        indices = np.empty(idx_count, np.int64)
        values = np.empty(idx_count, np.float32)
        p = 0
        for i in range(n):
            if keep[i] == 1:
                indices[p] = i
                values[p] = x[i]
                p += 1
        recon = _interpolate(indices, values, n)
        for i in range(n):
            if np.isfinite(x[i]):
                if not (np.abs(np.float64(recon[i]) - np.float64(x[i])) <= eps):
                    if keep[i] == 0:
                        keep[i] = 1
                        changed = True


@njit(cache=True)
def _gap_ok(x, i1, i2, eps):
    """Can [i1, i2] be bridged by one float32-rounded segment?"""
    v1 = np.float64(x[i1])
    v2 = np.float64(x[i2])
    if not (np.isfinite(v1) and np.isfinite(v2)):
        return False
    span = np.float64(i2 - i1)
    for s in range(i1 + 1, i2):
        if not np.isfinite(x[s]):
            return False
        interp = np.float32(v1 + (v2 - v1) * (np.float64(s - i1) / span))
        if not (np.abs(np.float64(interp) - np.float64(x[s])) <= eps):
            return False
    return True


@njit(cache=True)
def _prune(x, keep, eps):
    n = x.size
    changed = True
    while changed:
        changed = False
        prev = 0
        t = 1
        while t < n - 1:
            if keep[t] == 0:
                t += 1
                continue
            nxt = t + 1
            while keep[nxt] == 0:
                nxt += 1
            if _gap_ok(x, prev, nxt, eps):
                keep[t] = 0
                changed = True
            else:
                prev = t
            t = nxt


def ca_compress(x: np.ndarray, epsilon: float):
    """Compress one channel; returns (indices int64, values float32)."""
    eps = float(epsilon)
    if eps <= 0:
        raise DataFormatError("epsilon must be positive")
    x = np.ascontiguousarray(x, dtype=np.float32)
    keep = _greedy_keep(x, eps)
    if x.size:
        _repair(x, keep, eps)
        _prune(x, keep, eps)
        _repair(x, keep, eps)
    indices = np.nonzero(keep)[0].astype(np.int64)
    values = x[indices]
    return indices, values


def ca_decompress(indices: np.ndarray, values: np.ndarray, n: int) -> np.ndarray:
    """Linear interpolation between retained points; exact at them."""
    indices = np.asarray(indices, dtype=np.int64)
    values = np.ascontiguousarray(values, dtype=np.float32)
    if indices.size != values.size:
        raise CorruptContainerError("retained index/value count mismatch")
    if n == 0:
        if indices.size:
            raise CorruptContainerError("retained points for an empty series")
        return np.zeros(0, np.float32)
    if indices.size == 0 or indices[0] != 0 or indices[-1] != n - 1:
        raise CorruptContainerError("retained points must cover [0, n-1]")
    if np.any(np.diff(indices) <= 0):
        raise CorruptContainerError("retained indices must strictly increase")
    return _interpolate(indices, values, n)
