"""Training loop, checkpoint I/O and one-shot synthesis."""
from __future__ import annotations

import logging
import os
from dataclasses import dataclass

import numpy as np

from . import dsp
from .autodiff import Adam, clip_grad_norm, no_grad
from .autodiff import checkpoint as ckpt
from .condition import FeatureNorm
from .config import RunConfig
from .loss import spectral_loss
from .model import HNSF, ModelConfig

log = logging.getLogger(__name__)


class TrainingAborted(RuntimeError):
    pass


@dataclass
class Utterance:
    waveform: np.ndarray
    features: dsp.AcousticFeatures

    def __post_init__(self):
        n = min(self.features.n_frames, self.waveform.size // dsp.FRAME_SHIFT)
        if n < 1:
            raise ValueError("utterance shorter than one frame")
        self.features = dsp.AcousticFeatures(self.features.f0[:n], self.features.mel[:n])
        self.waveform = np.asarray(self.waveform[:n * dsp.FRAME_SHIFT], dtype=np.float64)


def _segment(utt, frames, rng):
    """Random frame-aligned crop of at most ``frames`` frames."""
    total = utt.features.n_frames
    if total <= frames:
        return utt.features, utt.waveform
    start = int(rng.integers(0, total - frames + 1))
    f = utt.features
    feats = dsp.AcousticFeatures(f.f0[start:start + frames], f.mel[start:start + frames])
    s = start * dsp.FRAME_SHIFT
    return feats, utt.waveform[s:s + frames * dsp.FRAME_SHIFT]


# ---------------------------------------------------------------------------
# checkpoints
# ---------------------------------------------------------------------------

def save_checkpoint(path, model, optimizer=None, step=0, run_config=None):
    arrays = dict(model.state_dict())
    arrays.update(model.condition.norm.to_arrays())
    meta = {"format": 1, "model": model.config.to_dict(), "step": int(step)}
    if optimizer is not None:
        arrays.update(optimizer.state_dict())
        meta["optim"] = {"t": optimizer.t, "skipped": optimizer.skipped}
    if run_config is not None:
        meta["run"] = run_config.to_dict()
    tmp = f"{path}.tmp"
    ckpt.save(tmp, arrays, meta)
    os.replace(tmp, path)


def load_checkpoint(path, variant=None):
    """Returns ``(model, arrays, meta)``; rejects a variant mismatch."""
    arrays, meta = ckpt.load(path)
    config = ModelConfig.from_dict(meta["model"])
    if variant is not None and variant != config.variant:
        raise ValueError(f"checkpoint holds a {config.variant!r} model, "
                         f"requested {variant!r}")
    model = HNSF(config)
    params = {k: v for k, v in arrays.items()
              if not k.startswith(("optim.", "buffer."))}
    model.load_state_dict(params)
    if "buffer.norm.f0" in arrays:
        model.condition.norm = FeatureNorm.from_arrays(arrays)
    return model, arrays, meta


# ---------------------------------------------------------------------------
# training
# ---------------------------------------------------------------------------

@dataclass
class TrainResult:
    model: HNSF
    curve: list
    checkpoint: str | None


def train(dataset, cfg: RunConfig, steps=None, out_dir=None):
    """Adam on random frame-aligned segments, batch size 1.

    The loss curve has ``steps + 1`` rows: row k is the loss of the parameters
    after k updates. Deterministic for a fixed ``cfg.seed``.
    """
    if not dataset:
        raise ValueError("dataset is empty")
    steps = cfg.steps if steps is None else steps
    model = HNSF(cfg.model_config(), seed=cfg.seed)
    model.condition.norm = FeatureNorm.fit([u.features for u in dataset])
    params = model.parameters()
    opt = Adam(params, lr=cfg.optim.lr, betas=cfg.optim.betas, eps=cfg.optim.eps)
    rng = np.random.default_rng([cfg.seed, 1])
    seg_frames = cfg.segment_samples // dsp.FRAME_SHIFT
    curve = []
    last_ckpt = None

    def save(step):
        nonlocal last_ckpt
        if out_dir is None:
            return
        path = os.path.join(out_dir, "model.ckpt")
        save_checkpoint(path, model, opt, step, cfg)
        if step and cfg.checkpoint_every and step % cfg.checkpoint_every == 0:
            save_checkpoint(os.path.join(out_dir, f"step_{step:06d}.ckpt"), model, opt, step, cfg)
        last_ckpt = path

    def evaluate():
        utt = dataset[int(rng.integers(len(dataset)))]
        feats, target = _segment(utt, seg_frames, rng)
        out = model(feats, rng)
        return spectral_loss(out.waveform, target, cfg.losses)

    save(0)
    for step in range(steps + 1):
        model.zero_grad()
        report = evaluate()
        total = report.value
        curve.append((step, *report.per_resolution, total))
        if not np.isfinite(total):
            raise TrainingAborted(f"non-finite loss at step {step}; "
                                  f"last good checkpoint: {last_ckpt}")
        if step == steps:
            break
        if step and cfg.checkpoint_every and step % cfg.checkpoint_every == 0:
            save(step)
        report.total.backward()
        clip_grad_norm(params, cfg.optim.clip_norm)
        opt.step()
        spec = model.condition.fusion_spec
        if spec is not None and spec.trainable and not np.all(np.isfinite(model.condition.fusion.data)):
            raise TrainingAborted(f"fusion parameters non-finite after step {step}: "
                                  f"{model.condition.fusion.data}")
        if step % 50 == 0:
            log.info("step %d loss %.4f", step, total)
    if steps:
        save(steps)
    return TrainResult(model, curve, last_ckpt)


# ---------------------------------------------------------------------------
# inference
# ---------------------------------------------------------------------------

def synthesize(model, feats, seed=0):
    """One-shot generation; returns samples clipped to [-1, 1]."""
    with no_grad():
        out = model(feats, np.random.default_rng(seed))
    return np.clip(out.waveform.data, -1.0, 1.0)


def mvf_trajectory(model, feats, seed=0):
    """Per-sample (v, r, smoothed fc) from a sinc-variant model."""
    if model.variant == "base":
        raise ValueError("the base variant has no trainable cutoff trajectory")
    with no_grad():
        cond = model.condition(feats)
    return cond.uv, cond.r.data, cond.fc.data
