"""Experiment configuration shared by the command line and scripted runs."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from . import nn
from .benchmark import CLASSIFIERS, DEFAULT_NET_PRESETS, MODELS, ModelSpec, run_benchmark
from .core import LabeledDataset, SamplingContext, make_context, make_rng
from .evaluation import EvalReport, SplitSpec
from .features import FeatureConfig
from .ingest import default_signatures, generate_dataset, read_segments


@dataclass
class ExperimentConfig:
    """Everything needed to reproduce one benchmark run.

    ``data_path`` selects a segment file; otherwise a synthetic dataset of
    ``classes`` x ``per_class`` segments is generated from ``seed``.
    ``presets`` maps network models to preset names and ``net_overrides``
    patches individual NetConfig fields per model.
    """

    f_s: int = 2000
    f_0: int = 50
    duration: float = 0.5
    data_path: str | None = None
    classes: int = 8
    per_class: int = 100
    models: tuple[str, ...] = MODELS
    classifiers: tuple[str, ...] = CLASSIFIERS
    presets: dict[str, str] = field(default_factory=dict)
    net_overrides: dict[str, dict[str, Any]] = field(default_factory=dict)
    epochs: int | None = None
    feature_norm: str = "maxabs"
    norm_fit: str = "train"
    dims: int = 212
    features: dict[str, Any] | None = None
    test_fraction: float = 0.2
    validation_fraction: float = 0.2
    out: str = "results"
    seed: int = 0

    def __post_init__(self):
        self.models = tuple(self.models)
        self.classifiers = tuple(self.classifiers)
        bad = [m for m in self.models if m not in MODELS]
        if bad:
            raise ValueError(f"unknown models {bad}; choose from {MODELS}")
        bad = [c for c in self.classifiers if c not in CLASSIFIERS]
        if bad:
            raise ValueError(f"unknown classifiers {bad}; choose from {CLASSIFIERS}")
        for model, name in self.presets.items():
            if nn.preset(name).architecture.value != model:
                raise ValueError(f"preset {name!r} does not configure model {model!r}")

    @property
    def context(self) -> SamplingContext:
        return make_context(self.f_s, self.f_0, self.duration)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ExperimentConfig":
        d = dict(d)
        ctx = d.pop("context", {})
        for src, dst in (("fs", "f_s"), ("f0", "f_0"), ("duration", "duration")):
            if src in ctx:
                d[dst] = ctx[src]
        ds = d.pop("dataset", {})
        if "path" in ds:
            d["data_path"] = ds["path"]
        for k in ("classes", "per_class"):
            if k in ds.get("synthetic", {}):
                d[k] = ds["synthetic"][k]
        split = d.pop("split", {})
        for k in ("test_fraction", "validation_fraction"):
            if k in split:
                d[k] = split[k]
        if isinstance(d.get("presets"), list):
            d["presets"] = {nn.preset(p).architecture.value: p for p in d["presets"]}
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def net_config(self, model: str) -> nn.NetConfig:
        name = self.presets.get(model, DEFAULT_NET_PRESETS[model])
        cfg = nn.scale_config(nn.preset(name), self.context, self.epochs)
        if model in self.net_overrides:
            over = dict(self.net_overrides[model])
            if "factors" in over:
                over["factors"] = tuple(over["factors"])
            cfg = cfg.replace(**over)
        return cfg

    def model_specs(self) -> list[ModelSpec]:
        fc = FeatureConfig.from_dict(self.features) if self.features else None
        specs = []
        for m in self.models:
            net = self.net_config(m) if m in DEFAULT_NET_PRESETS else None
            if m == "cnn":
                specs.append(ModelSpec("cnn", net=net))
                continue
            for c in self.classifiers:
                specs.append(ModelSpec(m, c, self.feature_norm, self.norm_fit, self.dims, net,
                                       fc if m == "handcrafted" else None))
        return specs

    def load_dataset(self) -> LabeledDataset:
        if self.data_path:
            return read_segments(self.data_path, self.context)
        return generate_dataset(default_signatures(self.classes), self.per_class,
                                self.context, make_rng(self.seed, "data"))


def run_experiment(config: ExperimentConfig,
                   dataset: LabeledDataset | None = None) -> list[EvalReport]:
    dataset = dataset if dataset is not None else config.load_dataset()
    split = SplitSpec(config.test_fraction, config.validation_fraction)
    return run_benchmark(dataset, config.model_specs(), split, make_rng(config.seed, "benchmark"))
