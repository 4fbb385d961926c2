"""Harmonic-plus-noise NSF model: baseline (fixed FIR merge) and sinc variants."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import dsp
from .autodiff import Linear, Conv1d, Module, Tensor, ops
from .condition import ConditionNet, ConditionOutputs
from .sinc_filter import fixed_merge, sinc_merge
from .source import HarmonicMerge, SourceConfig, make_excitation

VARIANTS = ("base", "sinc1", "sinc2", "sinc3")
NYQUIST = 8000.0


@dataclass(frozen=True)
class ModelConfig:
    variant: str = "sinc1"
    harmonic_blocks: int = 5
    noise_blocks: int = 1
    channels: int = 64
    layers_per_block: int = 10
    kernel: int = 3
    taps: int = 31
    cond_dim: int = 64
    mvf_hidden: int = 32
    voiced_cutoffs_hz: tuple = (5000.0, 7000.0)
    unvoiced_cutoffs_hz: tuple = (1000.0, 3000.0)
    sinc3_init: tuple = (1.0, 0.5, 0.0)
    source: SourceConfig = field(default_factory=SourceConfig)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.taps % 2 == 0:
            raise ValueError(f"taps must be odd, got {self.taps}")

    @classmethod
    def tiny(cls, variant="sinc1", **kw):
        return cls(variant=variant, harmonic_blocks=1, noise_blocks=1, channels=16, **kw)

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if "source" in d and isinstance(d["source"], dict):
            d["source"] = SourceConfig(**d["source"])
        for k in ("voiced_cutoffs_hz", "unvoiced_cutoffs_hz", "sinc3_init"):
            if k in d:
                d[k] = tuple(d[k])
        return cls(**d)

    def to_dict(self):
        return asdict(self)

    def with_variant(self, variant):
        return replace(self, variant=variant)


class FilterBlock(Module):
    """FF(1->C), 10 rounds of x <- tanh(dilated CONV(x)) + x + cond, FF(C->1), + input.

    When C differs from the conditioning width, cond goes through an FF
    projection first.
    """

    def __init__(self, channels, cond_dim, rng, layers=10, kernel=3):
        self.ff_in = Linear(1, channels, rng)
        self.convs = [Conv1d(channels, channels, kernel, rng, dilation=2 ** (k % 10))
                      for k in range(layers)]
        self.cond_proj = Linear(cond_dim, channels, rng) if channels != cond_dim else None
        self.ff_out = Linear(channels, 1, rng)

    def __call__(self, p, cond):
        if p.data.ndim == 1:
            p = ops.reshape(p, (-1, 1))
        if p.shape[0] != cond.shape[0]:
            raise ValueError(f"signal has {p.shape[0]} samples but cond has {cond.shape[0]}")
        c = self.cond_proj(cond) if self.cond_proj is not None else cond
        x = self.ff_in(p)
        for conv in self.convs:
            x = ops.add(ops.add(ops.tanh(conv(x)), x), c)
        return ops.add(self.ff_out(x), p)


def filter_block(p, cond, block):
    return block(p, cond)


@dataclass
class ModelOutput:
    waveform: Tensor
    harmonic: Tensor
    noise: Tensor
    condition: ConditionOutputs
    fc_low: np.ndarray
    fc_high: np.ndarray


class HNSF(Module):
    def __init__(self, config: ModelConfig, seed=0):
        rng = np.random.default_rng(seed)
        self.config = config
        self.condition = ConditionNet(config.variant, rng, cond_dim=config.cond_dim,
                                      mvf_hidden=config.mvf_hidden,
                                      sinc3_init=config.sinc3_init)
        self.harmonic_merge = HarmonicMerge(config.source.num_harmonics, rng)
        self.harmonic_blocks = [
            FilterBlock(config.channels, config.cond_dim, rng, config.layers_per_block,
                        config.kernel)
            for _ in range(config.harmonic_blocks)]
        self.noise_blocks = [
            FilterBlock(config.channels, config.cond_dim, rng, config.layers_per_block,
                        config.kernel)
            for _ in range(config.noise_blocks)]

    @property
    def variant(self):
        return self.config.variant

    def baseline_cutoffs(self, uv):
        voiced = uv > 0.5
        lo_v, hi_v = (f / NYQUIST for f in self.config.voiced_cutoffs_hz)
        lo_u, hi_u = (f / NYQUIST for f in self.config.unvoiced_cutoffs_hz)
        return np.where(voiced, lo_v, lo_u), np.where(voiced, hi_v, hi_u)

    def __call__(self, feats: dsp.AcousticFeatures, rng) -> ModelOutput:
        if feats.mel.shape[1] != dsp.MEL_BANDS:
            raise ValueError(f"expected {dsp.MEL_BANDS} mel bands, got {feats.mel.shape[1]}")
        cond = self.condition(feats)
        exc = make_excitation(cond.f_up, self.config.source, rng)
        h = self.harmonic_merge(Tensor(exc.harmonics))
        for block in self.harmonic_blocks:
            h = block(h, cond.cond)
        n = Tensor(exc.noise[:, None])
        for block in self.noise_blocks:
            n = block(n, cond.cond)
        h = ops.reshape(h, (-1,))
        n = ops.reshape(n, (-1,))
        M = self.config.taps
        if self.variant == "base":
            lo, hi = self.baseline_cutoffs(cond.uv)
            out = fixed_merge(h, n, lo, hi, M)
        else:
            lo = hi = cond.fc.data
            out = sinc_merge(h, n, cond.fc, M)
        return ModelOutput(out, h, n, cond, lo, hi)


def forward(model, feats, rng):
    return model(feats, rng)
