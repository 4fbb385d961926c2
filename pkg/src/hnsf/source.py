"""Sine-harmonic and Gaussian-noise excitation."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .autodiff import Linear, Module, ops


@dataclass(frozen=True)
class SourceConfig:
    alpha: float = 0.1
    sigma: float = 0.003
    num_harmonics: int = 8
    sample_rate: int = 16000

    def __post_init__(self):
        if self.alpha <= 0 or self.sigma <= 0:
            raise ValueError("alpha and sigma must be positive")
        if self.num_harmonics < 1:
            raise ValueError("num_harmonics must be >= 1")


@dataclass
class Excitation:
    harmonics: np.ndarray  # (T, I), one column per harmonic
    noise: np.ndarray      # (T,)
    phases: np.ndarray     # (I,)


class AliasingWarning(UserWarning):
    pass


def cumulative_phase(f, i, sample_rate):
    """sum_{k<=t} 2 pi i f_k / N_s, accumulated in wrapped steps."""
    step = np.mod(2.0 * np.pi * i * np.asarray(f, dtype=np.float64) / sample_rate, 2.0 * np.pi)
    return np.mod(np.cumsum(step), 2.0 * np.pi)


def sine_harmonic(f, i, cfg: SourceConfig, rng, phase=None):
    """Excitation for harmonic ``i`` (1-based) of the per-sample F0 track ``f``.

    Voiced samples: alpha*sin(phase) + N(0, sigma^2).
    Unvoiced samples: alpha/(3 sigma) * N(0, sigma^2).
    """
    f = np.asarray(f, dtype=np.float64)
    if np.any(f < 0):
        raise ValueError("F0 must be non-negative")
    if not 1 <= i <= cfg.num_harmonics:
        raise ValueError(f"harmonic index {i} outside 1..{cfg.num_harmonics}")
    voiced = f > 0
    if np.any(i * f[voiced] >= cfg.sample_rate / 2):
        warnings.warn(f"harmonic {i} exceeds Nyquist on some voiced samples",
                      AliasingWarning, stacklevel=2)
    if phase is None:
        phase = rng.uniform(-np.pi, np.pi)
    noise = rng.normal(0.0, cfg.sigma, size=f.shape)
    sine = cfg.alpha * np.sin(cumulative_phase(f, i, cfg.sample_rate) + phase) + noise
    return np.where(voiced, sine, cfg.alpha / (3.0 * cfg.sigma) * noise)


def noise_excitation(length, cfg: SourceConfig, rng):
    return rng.normal(0.0, cfg.alpha / 3.0, size=int(length))


def make_excitation(f, cfg: SourceConfig, rng):
    """All harmonics plus the noise-branch source for one utterance."""
    f = np.asarray(f, dtype=np.float64)
    phases = rng.uniform(-np.pi, np.pi, size=cfg.num_harmonics)
    cols = [sine_harmonic(f, i, cfg, rng, phase=phases[i - 1])
            for i in range(1, cfg.num_harmonics + 1)]
    harmonics = np.stack(cols, axis=1) if cols else np.zeros((f.size, 0))
    return Excitation(harmonics=harmonics, noise=noise_excitation(f.size, cfg, rng),
                      phases=phases)


class HarmonicMerge(Module):
    """e = tanh(sum_i w_i e_i + w_b): one FF unit over the harmonic stack."""

    def __init__(self, num_harmonics, rng):
        self.ff = Linear(num_harmonics, 1, rng)

    def __call__(self, harmonics):
        return ops.tanh(self.ff(harmonics))


def merge_harmonics(harmonics, merge: HarmonicMerge):
    return merge(harmonics)
