"""Condition network: frame features -> per-sample conditioning, U/V track and cutoff."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import dsp
from .autodiff import BiLSTM, Conv1d, Module, Parameter, Tensor, ops
from .sinc_filter import FC_MAX, FC_MIN

VOICED_LEVEL = 0.7
UNVOICED_LEVEL = 0.3


@dataclass(frozen=True)
class FusionSpec:
    """fc = F(a*v + b*r + c). Only ``sinc3`` trains (a, b, c)."""

    kind: str
    a: float
    b: float
    c: float
    activation: str  # "identity" | "sigmoid"

    @property
    def trainable(self):
        return self.kind == "sinc3"

    @classmethod
    def for_variant(cls, kind, init=(1.0, 0.5, 0.0)):
        if kind == "sinc1":
            return cls("sinc1", 1.0, 0.2, 0.0, "identity")
        if kind == "sinc2":
            return cls("sinc2", 0.0, 0.5, 0.5, "identity")
        if kind == "sinc3":
            return cls("sinc3", *init, "sigmoid")
        raise ValueError(f"no fusion rule for variant {kind!r}")


@dataclass
class FeatureNorm:
    """Input standardisation; identity unless fitted on training data."""

    mel_mean: np.ndarray = field(default_factory=lambda: np.zeros(dsp.MEL_BANDS))
    mel_std: np.ndarray = field(default_factory=lambda: np.ones(dsp.MEL_BANDS))
    f0_mean: float = 0.0
    f0_std: float = 1.0

    @classmethod
    def fit(cls, feature_list):
        mel = np.concatenate([f.mel for f in feature_list], axis=0)
        f0 = np.concatenate([f.f0[f.voiced] for f in feature_list])
        f0_mean = float(f0.mean()) if f0.size else 0.0
        f0_std = float(f0.std()) if f0.size > 1 and f0.std() > 0 else 1.0
        return cls(mel.mean(axis=0), np.maximum(mel.std(axis=0), 1e-3), f0_mean, f0_std)

    def mel(self, feats):
        return (feats.mel - self.mel_mean) / self.mel_std

    def f0(self, feats):
        # unvoiced frames stay at exactly 0
        return np.where(feats.voiced, (feats.f0 - self.f0_mean) / self.f0_std, 0.0)

    def to_arrays(self):
        return {
            "buffer.norm.mel_mean": self.mel_mean,
            "buffer.norm.mel_std": self.mel_std,
            "buffer.norm.f0": np.array([self.f0_mean, self.f0_std]),
        }

    @classmethod
    def from_arrays(cls, arrays):
        f0 = arrays["buffer.norm.f0"]
        return cls(np.array(arrays["buffer.norm.mel_mean"]),
                   np.array(arrays["buffer.norm.mel_std"]), float(f0[0]), float(f0[1]))


@dataclass
class ConditionOutputs:
    f_up: np.ndarray          # (T,) F0 in Hz
    cond: Tensor              # (T, 64)
    uv: np.ndarray            # (T,) 0.7 / 0.3
    r: Tensor | None = None   # (T,) in (-1, 1)
    fc_raw: Tensor | None = None
    fc: Tensor | None = None


def uv_trajectory(f0_frames, factor=dsp.FRAME_SHIFT):
    v = np.where(np.asarray(f0_frames) > 0, VOICED_LEVEL, UNVOICED_LEVEL)
    return dsp.upsample_repeat(v, factor)


def smooth(x: Tensor, window_ms=5.0):
    """Differentiable centred moving average (81 taps at 16 kHz)."""

    def forward(a):
        return dsp.moving_average(a, window_ms), None

    def backward(g, _):
        return (dsp.moving_average_adjoint(g, window_ms),)

    return ops.custom(forward, backward, x, op="moving-average")


def fuse_cutoff(v, r, spec: FusionSpec, abc: Tensor | None = None, smoothing=True):
    """Returns ``(fc_raw, fc)``: the fused value and its smoothed, clamped version."""
    v = np.asarray(v, dtype=np.float64)
    if r.shape != v.shape:
        raise ValueError(f"v has shape {v.shape} but r has shape {r.shape}")
    if spec.trainable:
        if abc is None:
            abc = Tensor([spec.a, spec.b, spec.c])
        if not np.all(np.isfinite(abc.data)):
            raise FloatingPointError(f"fusion parameters became non-finite: {abc.data}")
        x = ops.add(ops.add(ops.mul(abc[0], v), ops.mul(abc[1], r)), abc[2])
    else:
        x = ops.add(ops.mul(r, spec.b), spec.a * v + spec.c)
    fc_raw = ops.sigmoid(x) if spec.activation == "sigmoid" else x
    fc = smooth(fc_raw) if smoothing else fc_raw
    return fc_raw, ops.clip(fc, FC_MIN, FC_MAX)


class ConditionNet(Module):
    """Bi-LSTM(64) + CONV(63, k=3) on mel, F0 appended -> 64-dim, repeated x80.

    For the sinc variants a second Bi-LSTM + CONV(1) + tanh stack predicts the
    cutoff residual r.
    """

    def __init__(self, variant, rng, mel_dim=dsp.MEL_BANDS, cond_dim=64, mvf_hidden=32,
                 sinc3_init=(1.0, 0.5, 0.0)):
        self.variant = variant
        self.cond_dim = cond_dim
        self.bilstm = BiLSTM(mel_dim, cond_dim // 2, rng)
        self.conv = Conv1d(2 * (cond_dim // 2), cond_dim - 1, 3, rng)
        self.fusion_spec = None
        if variant != "base":
            self.mvf_bilstm = BiLSTM(mel_dim, mvf_hidden, rng)
            self.mvf_conv = Conv1d(2 * mvf_hidden, 1, 3, rng)
            self.fusion_spec = FusionSpec.for_variant(variant, sinc3_init)
            if self.fusion_spec.trainable:
                self.fusion = Parameter(np.array(sinc3_init, dtype=np.float64))
        self.norm = FeatureNorm()

    def condition_features(self, feats):
        mel = Tensor(self.norm.mel(feats))
        h = self.conv(self.bilstm(mel))
        f0 = Tensor(self.norm.f0(feats)[:, None])
        return ops.repeat_rows(ops.concat([h, f0], axis=1), dsp.FRAME_SHIFT)

    def mvf_residual(self, feats):
        mel = Tensor(self.norm.mel(feats))
        r = ops.tanh(self.mvf_conv(self.mvf_bilstm(mel)))
        return ops.reshape(ops.repeat_rows(r, dsp.FRAME_SHIFT), (-1,))

    def __call__(self, feats):
        out = ConditionOutputs(
            f_up=dsp.upsample_repeat(feats.f0),
            cond=self.condition_features(feats),
            uv=uv_trajectory(feats.f0),
        )
        if self.fusion_spec is not None:
            out.r = self.mvf_residual(feats)
            abc = getattr(self, "fusion", None)
            out.fc_raw, out.fc = fuse_cutoff(out.uv, out.r, self.fusion_spec, abc)
        return out
