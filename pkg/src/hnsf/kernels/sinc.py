"""Time-variant windowed-sinc merge kernels.

Two implementations with identical signatures:

* ``*_np``: vectorised numpy over a ``(T, M)`` tap matrix.
* ``*_nb``: per-sample loops, jitted with numba; taps are recomputed on the
  fly and reused while consecutive cutoffs are identical.

Tap layout is causal: column ``m`` multiplies ``x[t - m]``.
"""
import math

import numpy as np

from .._backend import njit


def hamming_centered(M):
    """0.54 + 0.46 cos(2 pi n / M) for n = -(M-1)/2 .. (M-1)/2."""
    n = np.arange(M) - (M - 1) // 2
    return 0.54 + 0.46 * np.cos(2.0 * np.pi * n / M)


# ---------------------------------------------------------------------------
# numpy path
# ---------------------------------------------------------------------------

def design_np(fc, M):
    """Normalised low/high taps and the terms needed for their derivatives.

    ``fc`` has shape ``(T,)``. Returns a dict of arrays; taps are ``(T, M)``
    and already index-shifted to causal order.
    """
    fc = np.asarray(fc, dtype=np.float64)
    n = (np.arange(M) - (M - 1) // 2).astype(np.float64)
    win = hamming_centered(M)
    arg = np.pi * fc[:, None] * n[None, :]
    nz = n != 0
    sinc_part = np.empty_like(arg)
    sinc_part[:, nz] = np.sin(arg[:, nz]) / (np.pi * n[nz])
    sinc_part[:, ~nz] = fc[:, None]
    low_raw = sinc_part * win
    delta = (~nz).astype(np.float64)
    high_raw = (delta - sinc_part) * win
    parity = np.where(n.astype(np.int64) % 2 == 0, 1.0, -1.0)
    alpha = win * np.cos(arg)
    beta_p = low_raw.sum(axis=1)
    beta_a = (high_raw * parity).sum(axis=1)
    gamma_p = alpha.sum(axis=1)
    gamma_a = (alpha * parity).sum(axis=1)
    return {
        "low": low_raw / beta_p[:, None],
        "high": high_raw / beta_a[:, None],
        "low_raw": low_raw,
        "high_raw": high_raw,
        "alpha": alpha,
        "beta_p": beta_p,
        "beta_a": beta_a,
        "gamma_p": gamma_p,
        "gamma_a": gamma_a,
    }


def tap_jacobian_np(d):
    """d(taps)/d(fc) for low and high taps from a ``design_np`` result."""
    d_low = (d["alpha"] - d["low"] * d["gamma_p"][:, None]) / d["beta_p"][:, None]
    d_high = (d["high"] * d["gamma_a"][:, None] - d["alpha"]) / d["beta_a"][:, None]
    return d_low, d_high


def _windows(x, M):
    # row t, column m -> x[t - m], zeros before the start
    T = x.shape[0]
    padded = np.concatenate([np.zeros(M - 1), x])
    view = np.lib.stride_tricks.sliding_window_view(padded, M)[:T]
    return view[:, ::-1]


def _design_unique(fc, M):
    uniq, inverse = np.unique(fc, return_inverse=True)
    if uniq.size * 4 <= fc.size:
        d = design_np(uniq, M)
        return {k: v[inverse] for k, v in d.items()}
    return design_np(fc, M)


def merge_forward_np(op, oa, fc_low, fc_high, M):
    lo = _design_unique(fc_low, M)["low"]
    hi = _design_unique(fc_high, M)["high"]
    return (_windows(op, M) * lo).sum(axis=1) + (_windows(oa, M) * hi).sum(axis=1)


def merge_backward_np(g, op, oa, fc_low, fc_high, M):
    T = op.shape[0]
    dl = _design_unique(fc_low, M)
    dh = _design_unique(fc_high, M)
    jac_low, _ = tap_jacobian_np(dl)
    _, jac_high = tap_jacobian_np(dh)
    g_fc_low = g * (_windows(op, M) * jac_low).sum(axis=1)
    g_fc_high = g * (_windows(oa, M) * jac_high).sum(axis=1)
    g_op = np.zeros(T + M - 1)
    g_oa = np.zeros(T + M - 1)
    # out[t] uses x[t - m]; padded index of x[t - m] is t - m + M - 1
    for m in range(M):
        g_op[M - 1 - m:M - 1 - m + T] += g * dl["low"][:, m]
        g_oa[M - 1 - m:M - 1 - m + T] += g * dh["high"][:, m]
    return g_op[M - 1:], g_oa[M - 1:], g_fc_low, g_fc_high


# ---------------------------------------------------------------------------
# numba path
# ---------------------------------------------------------------------------

@njit
def _design_one(fc, M, win, low, high, alpha):
    """Fill low/high/alpha in place; returns (beta_p, beta_a, gamma_p, gamma_a)."""
    half = (M - 1) // 2
    beta_p = 0.0
    beta_a = 0.0
    gamma_p = 0.0
    gamma_a = 0.0
    for m in range(M):
        n = m - half
        if n == 0:
            s = fc
            hr = (1.0 - fc) * win[m]
        else:
            s = math.sin(math.pi * fc * n) / (math.pi * n)
            hr = -s * win[m]
        lr = s * win[m]
        a = win[m] * math.cos(math.pi * fc * n)
        sign = 1.0 if n % 2 == 0 else -1.0
        low[m] = lr
        high[m] = hr
        alpha[m] = a
        beta_p += lr
        beta_a += sign * hr
        gamma_p += a
        gamma_a += sign * a
    for m in range(M):
        low[m] /= beta_p
        high[m] /= beta_a
    return beta_p, beta_a, gamma_p, gamma_a


@njit
def merge_forward_nb(op, oa, fc_low, fc_high, M):
    T = op.shape[0]
    out = np.zeros(T)
    win = np.empty(M)
    half = (M - 1) // 2
    for m in range(M):
        win[m] = 0.54 + 0.46 * math.cos(2.0 * math.pi * (m - half) / M)
    low = np.empty(M)
    high = np.empty(M)
    scratch = np.empty(M)
    dummy = np.empty(M)
    prev_lo = np.nan
    prev_hi = np.nan
    for t in range(T):
        if fc_low[t] != prev_lo:
            _design_one(fc_low[t], M, win, low, dummy, scratch)
            prev_lo = fc_low[t]
        if fc_high[t] != prev_hi:
            _design_one(fc_high[t], M, win, dummy, high, scratch)
            prev_hi = fc_high[t]
        acc = 0.0
        for m in range(min(M, t + 1)):
            acc += op[t - m] * low[m] + oa[t - m] * high[m]
        out[t] = acc
    return out


@njit
def merge_backward_nb(g, op, oa, fc_low, fc_high, M):
    T = op.shape[0]
    g_op = np.zeros(T)
    g_oa = np.zeros(T)
    g_fc_low = np.zeros(T)
    g_fc_high = np.zeros(T)
    win = np.empty(M)
    half = (M - 1) // 2
    for m in range(M):
        win[m] = 0.54 + 0.46 * math.cos(2.0 * math.pi * (m - half) / M)
    low = np.empty(M)
    high = np.empty(M)
    a_lo = np.empty(M)
    a_hi = np.empty(M)
    dummy = np.empty(M)
    bp = 1.0
    gp = 0.0
    ba = 1.0
    ga = 0.0
    prev_lo = np.nan
    prev_hi = np.nan
    for t in range(T):
        if fc_low[t] != prev_lo:
            bp, _, gp, _ = _design_one(fc_low[t], M, win, low, dummy, a_lo)
            prev_lo = fc_low[t]
        if fc_high[t] != prev_hi:
            _, ba, _, ga = _design_one(fc_high[t], M, win, dummy, high, a_hi)
            prev_hi = fc_high[t]
        gt = g[t]
        acc_lo = 0.0
        acc_hi = 0.0
        for m in range(min(M, t + 1)):
            xp = op[t - m]
            xa = oa[t - m]
            acc_lo += xp * (a_lo[m] - low[m] * gp) / bp
            acc_hi += xa * (high[m] * ga - a_hi[m]) / ba
            g_op[t - m] += gt * low[m]
            g_oa[t - m] += gt * high[m]
        g_fc_low[t] = gt * acc_lo
        g_fc_high[t] = gt * acc_hi
    return g_op, g_oa, g_fc_low, g_fc_high
