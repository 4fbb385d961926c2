"""Multi-resolution log-spectral amplitude distance."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import dsp
from .autodiff import Tensor, ops


@dataclass
class LossReport:
    total: Tensor
    per_resolution: tuple

    @property
    def value(self):
        return self.total.item()


def log_power_spectrogram(x: Tensor, cfg: dsp.StftConfig):
    """Differentiable log(|STFT|^2 + floor) of a 1-D signal tensor."""
    n = cfg.dft_bins
    win = dsp.hann(cfg.frame_length)

    def forward(sig):
        frames = dsp.frame_signal(sig, cfg.frame_length, cfg.frame_shift) * win
        spec = np.fft.rfft(frames, n=n, axis=1)
        power = spec.real ** 2 + spec.imag ** 2
        return np.log(power + dsp.LOG_FLOOR), (spec, power, sig.shape[0])

    def backward(g, ctx):
        spec, power, length = ctx
        # d log(P+e)/dP, then dP/dframe[n] = 2 Re(sum_k z_k X_k e^{+j2pi kn/N})
        z = (g / (power + dsp.LOG_FLOOR)) * spec
        z[:, 0] *= 2.0
        if n % 2 == 0:
            z[:, -1] *= 2.0
        frame_grad = np.fft.irfft(z, n=n, axis=1)[:, :cfg.frame_length] * n
        return (dsp.overlap_add(frame_grad * win, length, cfg.frame_shift),)

    return ops.custom(forward, backward, x, op="log-power-stft")


def _as_1d(x):
    if isinstance(x, Tensor):
        return x if x.data.ndim == 1 else ops.reshape(x, (-1,))
    return Tensor(np.asarray(x, dtype=np.float64).reshape(-1))


def spectral_loss(generated, natural, configs=dsp.LOSS_CONFIGS):
    """Sum over resolutions of mean 0.5 * (log|X|^2 - log|Y|^2)^2.

    The shorter signal is zero-padded to the longer one's length.
    """
    a, b = _as_1d(generated), _as_1d(natural)
    if a.shape[0] != b.shape[0]:
        length = max(a.shape[0], b.shape[0])
        a = _pad_to(a, length)
        b = _pad_to(b, length)
    parts = []
    for cfg in configs:
        diff = ops.sub(log_power_spectrogram(a, cfg), log_power_spectrogram(b, cfg))
        parts.append(ops.mul(ops.mean(ops.square(diff)), 0.5))
    total = parts[0]
    for p in parts[1:]:
        total = ops.add(total, p)
    return LossReport(total=total, per_resolution=tuple(p.item() for p in parts))


def _pad_to(x, length):
    extra = length - x.shape[0]
    if extra == 0:
        return x
    return ops.concat([x, Tensor(np.zeros(extra))], axis=0)
