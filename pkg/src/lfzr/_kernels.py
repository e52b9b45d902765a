"""Compiled per-sample encode/decode loops.

All predictor arithmetic is float32 with a fixed, sequential
accumulation order and no FMA, so encoder and decoder reconstructions
match bit-for-bit.  Quantization arithmetic is float64 (see quantizer
module); the reconstruction is rounded to float32 once and the encoder
falls back to the outlier path if that rounding breaks the bound.

Predictor ids: 0 last-value, 1 NLMS, 2 frozen NN.
"""

import numpy as np
from numba import njit

PRED_LAST = 0
PRED_NLMS = 1
PRED_NN = 2

F32_ZERO = np.float32(0.0)


@njit(cache=True)
def _nn_forward(
    hist, t, k,
    in_dims, out_dims, acts, bns,
    wf, bf, gf, bef, mf, vf, bn_eps,
    w_off, b_off, n_off,
    buf_a, buf_b,
):
    for i in range(k):
        buf_a[i] = hist[t - k + i]
    cur = buf_a
    nxt = buf_b
    cur_n = k
    for layer in range(in_dims.size):
        out_n = out_dims[layer]
        for o in range(out_n):
            acc = np.float32(0.0)
            base = w_off[layer] + o * in_dims[layer]
            for i in range(cur_n):
                acc = acc + wf[base + i] * cur[i]
            acc = acc + bf[b_off[layer] + o]
            if bns[layer] == 1:
                no = n_off[layer] + o
                centered = acc - mf[no]
                scale = np.float32(np.sqrt(vf[no] + bn_eps[layer]))
                acc = gf[no] * (centered / scale) + bef[no]
            if acts[layer] == 1 and acc < np.float32(0.0):
                acc = np.float32(0.0)
            nxt[o] = acc
        cur, nxt = nxt, cur
        cur_n = out_n
    return cur[0]


@njit(cache=True)
def _encode_channel(
    x, eps, k, mu, reg, pred_id,
    in_dims, out_dims, acts, bns,
    wf, bf, gf, bef, mf, vf, bn_eps,
    w_off, b_off, n_off,
    buf_a, buf_b,
    ckpt_ts, ckpt_w, ckpt_win,
):
    n = x.size
    idx = np.empty(n, np.uint16)
    recon = np.empty(n, np.float32)
    hist = np.empty(n, np.float32)
    outliers = np.empty(n, np.float32)
    n_out = 0
    w = np.zeros(k, np.float32)
    wtmp = np.empty(k, np.float32)
    mu32 = np.float32(mu)
    reg32 = np.float32(reg)
    prev_fin = np.float32(0.0)
    two_eps = 2.0 * eps
    ci = 0
    for t in range(n):
        # causal prediction from past reconstructions only
        if t == 0:
            y = np.float32(0.0)
        elif t < k:
            y = hist[t - 1]
        else:
            if pred_id == PRED_NLMS:
                acc = np.float32(0.0)
                for i in range(k):
                    acc = acc + w[i] * hist[t - k + i]
                y = acc
            elif pred_id == PRED_NN:
                y = _nn_forward(
                    hist, t, k,
                    in_dims, out_dims, acts, bns,
                    wf, bf, gf, bef, mf, vf, bn_eps,
                    w_off, b_off, n_off, buf_a, buf_b,
                )
            else:
                y = hist[t - 1]
            if not np.isfinite(y):
                y = prev_fin
        xt = x[t]
        is_outlier = True
        if np.isfinite(xt):
            delta = np.float64(xt) - np.float64(y)
            q = delta / two_eps
            qr = np.floor(q + 0.5)
            # tie rounding can slip one ulp in float64; prefer the nearer bin
            if np.abs(qr * two_eps - delta) > eps:
                qr += 1.0 if delta > qr * two_eps else -1.0
            if -32767.0 <= qr <= 32767.0:
                xh = np.float32(np.float64(y) + qr * two_eps)
                if np.abs(np.float64(xh) - np.float64(xt)) <= eps:
                    idx[t] = np.uint16(np.int64(qr) + 32767)
                    recon[t] = xh
                    is_outlier = False
        if is_outlier:
            idx[t] = np.uint16(65535)
            recon[t] = xt
            outliers[n_out] = xt
            n_out += 1
        xr = recon[t]
        if np.isfinite(xr):
            hv = xr
        else:
            hv = prev_fin
        if pred_id == PRED_NLMS and t >= k:
            e = recon[t] - y
            norm = np.float32(0.0)
            for i in range(k):
                norm = norm + hist[t - k + i] * hist[t - k + i]
            g = (mu32 * e) / (reg32 + norm)
            all_finite = True
            for i in range(k):
                cand = w[i] + g * hist[t - k + i]
                wtmp[i] = cand
                if not np.isfinite(cand):
                    all_finite = False
            if all_finite:
                for i in range(k):
                    w[i] = wtmp[i]
        hist[t] = hv
        prev_fin = hv
        while ci < ckpt_ts.size and ckpt_ts[ci] == t:
            for i in range(k):
                ckpt_w[ci, i] = w[i]
                s = t - k + 1 + i
                ckpt_win[ci, i] = hist[s] if s >= 0 else np.float32(0.0)
            ci += 1
    return idx, recon, outliers[:n_out]


@njit(cache=True)
def _decode_channel(
    idx, outliers, n, eps, k, mu, reg, pred_id,
    in_dims, out_dims, acts, bns,
    wf, bf, gf, bef, mf, vf, bn_eps,
    w_off, b_off, n_off,
    buf_a, buf_b,
    ckpt_ts, ckpt_w, ckpt_win,
):
    recon = np.empty(n, np.float32)
    hist = np.empty(n, np.float32)
    w = np.zeros(k, np.float32)
    wtmp = np.empty(k, np.float32)
    mu32 = np.float32(mu)
    reg32 = np.float32(reg)
    prev_fin = np.float32(0.0)
    two_eps = 2.0 * eps
    oi = 0
    ci = 0
    for t in range(n):
        if t == 0:
            y = np.float32(0.0)
        elif t < k:
            y = hist[t - 1]
        else:
            if pred_id == PRED_NLMS:
                acc = np.float32(0.0)
                for i in range(k):
                    acc = acc + w[i] * hist[t - k + i]
                y = acc
            elif pred_id == PRED_NN:
                y = _nn_forward(
                    hist, t, k,
                    in_dims, out_dims, acts, bns,
                    wf, bf, gf, bef, mf, vf, bn_eps,
                    w_off, b_off, n_off, buf_a, buf_b,
                )
            else:
                y = hist[t - 1]
            if not np.isfinite(y):
                y = prev_fin
        raw = idx[t]
        if raw == 65535:
            if oi >= outliers.size:
                return recon[:t], oi, False
            recon[t] = outliers[oi]
            oi += 1
        else:
            qr = np.float64(np.int64(raw) - 32767)
            recon[t] = np.float32(np.float64(y) + qr * two_eps)
        xr = recon[t]
        if np.isfinite(xr):
            hv = xr
        else:
            hv = prev_fin
        if pred_id == PRED_NLMS and t >= k:
            e = recon[t] - y
            norm = np.float32(0.0)
            for i in range(k):
                norm = norm + hist[t - k + i] * hist[t - k + i]
            g = (mu32 * e) / (reg32 + norm)
            all_finite = True
            for i in range(k):
                cand = w[i] + g * hist[t - k + i]
                wtmp[i] = cand
                if not np.isfinite(cand):
                    all_finite = False
            if all_finite:
                for i in range(k):
                    w[i] = wtmp[i]
        hist[t] = hv
        prev_fin = hv
        while ci < ckpt_ts.size and ckpt_ts[ci] == t:
            for i in range(k):
                ckpt_w[ci, i] = w[i]
                s = t - k + 1 + i
                ckpt_win[ci, i] = hist[s] if s >= 0 else np.float32(0.0)
            ci += 1
    return recon, oi, True


@njit(cache=True)
def _encode_multi(x, eps, k, mu, reg):
    """Joint NLMS over all variables; window taps split variable-major."""
    n, v = x.shape
    idx = np.empty((n, v), np.uint16)
    recon = np.empty((n, v), np.float32)
    hist = np.empty((n, v), np.float32)
    outliers = np.empty((n, v), np.float32)
    n_out = np.zeros(v, np.int64)
    w = np.zeros((v, k), np.float32)
    wtmp = np.empty(k, np.float32)
    wbuf = np.empty(k, np.float32)
    prev_fin = np.zeros(v, np.float32)
    mu32 = np.float32(mu)
    reg32 = np.float32(reg)
    two_eps = 2.0 * eps
    base = k // v
    rem = k - base * v
    for t in range(n):
        for j in range(v):
            if t == 0:
                y = np.float32(0.0)
            elif t < k:
                y = hist[t - 1, j]
            else:
                p = 0
                for i in range(v):
                    m = base + rem if i == j else base
                    end = t + 1 if i < j else t
                    for s in range(end - m, end):
                        wbuf[p] = hist[s, i]
                        p += 1
                acc = np.float32(0.0)
                for i in range(k):
                    acc = acc + w[j, i] * wbuf[i]
                y = acc
                if not np.isfinite(y):
                    y = prev_fin[j]
            xt = x[t, j]
            is_outlier = True
            if np.isfinite(xt):
                delta = np.float64(xt) - np.float64(y)
                q = delta / two_eps
                qr = np.floor(q + 0.5)
                if np.abs(qr * two_eps - delta) > eps:
                    qr += 1.0 if delta > qr * two_eps else -1.0
                if -32767.0 <= qr <= 32767.0:
                    xh = np.float32(np.float64(y) + qr * two_eps)
                    if np.abs(np.float64(xh) - np.float64(xt)) <= eps:
                        idx[t, j] = np.uint16(np.int64(qr) + 32767)
                        recon[t, j] = xh
                        is_outlier = False
            if is_outlier:
                idx[t, j] = np.uint16(65535)
                recon[t, j] = xt
                outliers[n_out[j], j] = xt
                n_out[j] += 1
            xr = recon[t, j]
            if np.isfinite(xr):
                hv = xr
            else:
                hv = prev_fin[j]
            hist[t, j] = hv  # visible to variables > j at this timestep
            if t >= k:
                e = recon[t, j] - y
                norm = np.float32(0.0)
                for i in range(k):
                    norm = norm + wbuf[i] * wbuf[i]
                g = (mu32 * e) / (reg32 + norm)
                all_finite = True
                for i in range(k):
                    cand = w[j, i] + g * wbuf[i]
                    wtmp[i] = cand
                    if not np.isfinite(cand):
                        all_finite = False
                if all_finite:
                    for i in range(k):
                        w[j, i] = wtmp[i]
            prev_fin[j] = hv
    return idx, recon, outliers, n_out


@njit(cache=True)
def _decode_multi(idx, out_flat, out_start, n, v, eps, k, mu, reg):
    recon = np.empty((n, v), np.float32)
    hist = np.empty((n, v), np.float32)
    w = np.zeros((v, k), np.float32)
    wtmp = np.empty(k, np.float32)
    wbuf = np.empty(k, np.float32)
    prev_fin = np.zeros(v, np.float32)
    opos = out_start.copy()
    mu32 = np.float32(mu)
    reg32 = np.float32(reg)
    two_eps = 2.0 * eps
    base = k // v
    rem = k - base * v
    for t in range(n):
        for j in range(v):
            if t == 0:
                y = np.float32(0.0)
            elif t < k:
                y = hist[t - 1, j]
            else:
                p = 0
                for i in range(v):
                    m = base + rem if i == j else base
                    end = t + 1 if i < j else t
                    for s in range(end - m, end):
                        wbuf[p] = hist[s, i]
                        p += 1
                acc = np.float32(0.0)
                for i in range(k):
                    acc = acc + w[j, i] * wbuf[i]
                y = acc
                if not np.isfinite(y):
                    y = prev_fin[j]
            raw = idx[t, j]
            if raw == 65535:
                if opos[j] >= out_start[j + 1]:
                    return recon[:t], False
                recon[t, j] = out_flat[opos[j]]
                opos[j] += 1
            else:
                qr = np.float64(np.int64(raw) - 32767)
                recon[t, j] = np.float32(np.float64(y) + qr * two_eps)
            xr = recon[t, j]
            if np.isfinite(xr):
                hv = xr
            else:
                hv = prev_fin[j]
            hist[t, j] = hv
            if t >= k:
                e = recon[t, j] - y
                norm = np.float32(0.0)
                for i in range(k):
                    norm = norm + wbuf[i] * wbuf[i]
                g = (mu32 * e) / (reg32 + norm)
                all_finite = True
                for i in range(k):
                    cand = w[j, i] + g * wbuf[i]
                    wtmp[i] = cand
                    if not np.isfinite(cand):
                        all_finite = False
                if all_finite:
                    for i in range(k):
                        w[j, i] = wtmp[i]
            prev_fin[j] = hv
    return recon, True
