"""Time-variant windowed-sinc low/high-pass merge with a closed-form cutoff gradient.

Per sample t the cutoff ``fc[t]`` (normalised to Nyquist) defines a Hamming
windowed-sinc low-pass for the harmonic branch and its spectral complement for
the noise branch. Both are causal, length M (odd), and gain-normalised: unit
gain at DC for the low-pass, unit magnitude at Nyquist for the high-pass.
"""
from __future__ import annotations

import numpy as np

from . import kernels
from .autodiff import ops
from .kernels.sinc import design_np, hamming_centered, tap_jacobian_np

DEFAULT_TAPS = 31
FC_MIN = 1e-3
FC_MAX = 1.0 - 1e-3


def _validate(fc, M):
    if M % 2 == 0 or M < 1:
        raise ValueError(f"filter length must be a positive odd number, got {M}")
    fc = np.asarray(fc, dtype=np.float64)
    if np.any(~np.isfinite(fc)) or np.any(fc <= 0.0) or np.any(fc >= 1.0):
        raise ValueError("cutoff must lie strictly inside (0, 1)")
    return fc


def raw_lowpass(fc, M=DEFAULT_TAPS):
    """Un-normalised centred low-pass taps, n = -(M-1)/2 .. (M-1)/2."""
    fc = _validate(fc, M)
    return design_np(np.atleast_1d(fc), M)["low_raw"][0]


def raw_highpass(fc, M=DEFAULT_TAPS):
    fc = _validate(fc, M)
    return design_np(np.atleast_1d(fc), M)["high_raw"][0]


def design_lowpass(fc, M=DEFAULT_TAPS):
    """Causal low-pass taps with unit DC gain."""
    fc = _validate(fc, M)
    return design_np(np.atleast_1d(fc), M)["low"][0]


def design_highpass(fc, M=DEFAULT_TAPS):
    """Causal high-pass taps with unit-magnitude Nyquist gain."""
    fc = _validate(fc, M)
    return design_np(np.atleast_1d(fc), M)["high"][0]


def tap_jacobian(fc, M=DEFAULT_TAPS):
    """(d low / d fc, d high / d fc), each of length M."""
    fc = _validate(fc, M)
    d_low, d_high = tap_jacobian_np(design_np(np.atleast_1d(fc), M))
    return d_low[0], d_high[0]


def frequency_response(taps, n_fft=1024):
    """Magnitude on n_fft/2 + 1 points from 0 to Nyquist."""
    return np.abs(np.fft.rfft(taps, n=n_fft))


def _prepare(op, oa, fc_low, fc_high, M):
    op = np.ascontiguousarray(op, dtype=np.float64)
    oa = np.ascontiguousarray(oa, dtype=np.float64)
    if op.shape != oa.shape or op.ndim != 1:
        raise ValueError(f"branch shapes differ: {op.shape} vs {oa.shape}")
    fc_low = np.ascontiguousarray(np.broadcast_to(fc_low, op.shape), dtype=np.float64)
    fc_high = np.ascontiguousarray(np.broadcast_to(fc_high, op.shape), dtype=np.float64)
    _validate(fc_low, M)
    _validate(fc_high, M)
    return op, oa, fc_low, fc_high


def merge_waveforms(op, oa, fc, M=DEFAULT_TAPS, fc_high=None):
    """out[t] = sum_m op[t-m] low_t[m] + oa[t-m] high_t[m], zero before t=0.

    ``fc_high`` defaults to ``fc``; passing it separately gives the
    fixed-filter baseline with different low/high cutoffs.
    """
    op, oa, lo, hi = _prepare(op, oa, fc, fc if fc_high is None else fc_high, M)
    return kernels.merge_forward(op, oa, lo, hi, M)


def backward_fc(dl_do, op, oa, fc, M=DEFAULT_TAPS):
    """dL/dfc[t] from dL/dout[t] via the closed-form tap Jacobians."""
    op, oa, lo, hi = _prepare(op, oa, fc, fc, M)
    g = np.ascontiguousarray(dl_do, dtype=np.float64)
    _, _, g_lo, g_hi = kernels.merge_backward(g, op, oa, lo, hi, M)
    return g_lo + g_hi


def merge_brute_force(op, oa, fc_low, fc_high, M=DEFAULT_TAPS):
    """Reference: design both filters at each sample and take two dot products."""
    op = np.asarray(op, dtype=np.float64)
    oa = np.asarray(oa, dtype=np.float64)
    T = op.size
    fc_low = np.broadcast_to(fc_low, (T,))
    fc_high = np.broadcast_to(fc_high, (T,))
    pp = np.concatenate([np.zeros(M - 1), op])
    pa = np.concatenate([np.zeros(M - 1), oa])
    out = np.empty(T)
    for t in range(T):
        lo = design_lowpass(fc_low[t], M)
        hi = design_highpass(fc_high[t], M)
        past_p = pp[t:t + M][::-1]
        past_a = pa[t:t + M][::-1]
        out[t] = past_p @ lo + past_a @ hi
    return out


def sinc_merge(op, oa, fc, M=DEFAULT_TAPS):
    """Differentiable merge: gradients flow to both branches and to ``fc``."""

    def forward(p, a, f):
        p, a, f, _ = _prepare(p, a, f, f, M)
        return kernels.merge_forward(p, a, f, f, M), (p, a, f)

    def backward(g, ctx):
        p, a, f = ctx
        g_p, g_a, g_lo, g_hi = kernels.merge_backward(
            np.ascontiguousarray(g), p, a, f, f, M)
        return g_p, g_a, g_lo + g_hi

    return ops.custom(forward, backward, op, oa, fc, op="sinc-merge")


def fixed_merge(op, oa, fc_low, fc_high, M=DEFAULT_TAPS):
    """Differentiable w.r.t. the branches only; cutoffs are constants."""
    fc_low = np.asarray(fc_low, dtype=np.float64)
    fc_high = np.asarray(fc_high, dtype=np.float64)

    def forward(p, a):
        p, a, lo, hi = _prepare(p, a, fc_low, fc_high, M)
        return kernels.merge_forward(p, a, lo, hi, M), (p, a, lo, hi)

    def backward(g, ctx):
        p, a, lo, hi = ctx
        g_p, g_a, _, _ = kernels.merge_backward(np.ascontiguousarray(g), p, a, lo, hi, M)
        return g_p, g_a

    return ops.custom(forward, backward, op, oa, op="fixed-merge")


__all__ = [
    "DEFAULT_TAPS", "FC_MIN", "FC_MAX", "backward_fc", "design_highpass",
    "design_lowpass", "fixed_merge", "frequency_response", "hamming_centered",
    "merge_brute_force", "merge_waveforms", "raw_highpass", "raw_lowpass",
    "sinc_merge", "tap_jacobian",
]
