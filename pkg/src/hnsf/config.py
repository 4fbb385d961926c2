"""Run configuration: model profile, source constants, losses, optimiser, seed."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields

from .dsp import LOSS_CONFIGS, StftConfig
from .model import ModelConfig
from .source import SourceConfig

PROFILES = ("full", "tiny")


@dataclass
class OptimConfig:
    lr: float = 3e-4
    betas: tuple = (0.9, 0.999)
    eps: float = 1e-8
    clip_norm: float = 5.0


@dataclass
class RunConfig:
    variant: str = "sinc1"
    profile: str = "full"
    model: dict = field(default_factory=dict)  # overrides on top of the profile
    source: SourceConfig = field(default_factory=SourceConfig)
    losses: tuple = LOSS_CONFIGS
    optim: OptimConfig = field(default_factory=OptimConfig)
    steps: int = 1000
    segment_samples: int = 16000
    batch_size: int = 1
    checkpoint_every: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.profile not in PROFILES:
            raise ValueError(f"profile must be one of {PROFILES}, got {self.profile!r}")
        if self.segment_samples % 80:
            raise ValueError("segment_samples must be a multiple of the 80-sample frame shift")
        if self.batch_size != 1:
            raise ValueError("only batch_size 1 is supported")

    def model_config(self) -> ModelConfig:
        base = ModelConfig.tiny(self.variant) if self.profile == "tiny" \
            else ModelConfig(variant=self.variant)
        d = base.to_dict()
        d.update(self.model)
        d["variant"] = self.variant
        d["source"] = asdict(self.source)
        return ModelConfig.from_dict(d)

    def to_dict(self):
        d = asdict(self)
        d["losses"] = [asdict(c) for c in self.losses]
        d["model_resolved"] = self.model_config().to_dict()
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d.pop("model_resolved", None)
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ValueError(f"unknown config keys: {unknown}")
        if "source" in d:
            d["source"] = SourceConfig(**d["source"])
        if "optim" in d:
            o = dict(d["optim"])
            if "betas" in o:
                o["betas"] = tuple(o["betas"])
            d["optim"] = OptimConfig(**o)
        if "losses" in d:
            d["losses"] = tuple(StftConfig(**c) for c in d["losses"])
        return cls(**d)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))
