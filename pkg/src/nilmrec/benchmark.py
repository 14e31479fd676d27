"""The seven-model benchmark: feature pipelines, classifiers and report output.

Every model shares one stratified split.  Feature-based models train their
classifier on train+validation; the networks use the validation part for
early stopping.  Each representation draws its randomness from a stream
keyed by its own description, so results do not depend on model order or
on parallel execution.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import classify, nn
from .core import LabeledDataset, Rng, SamplingContext, child_seed, make_rng
from .evaluation import EvalReport, SplitSpec, confusion, macro_metrics, split_indices
from .features import (FeatureConfig, FeatureMatrix, RandomSubsampler, extract_matrix,
                       handcrafted_extractor, rms25)
from .transform import apply, fit_apply_per_set, fit_norm, fit_pca

log = logging.getLogger(__name__)

MODELS = ("handcrafted", "ae", "cae", "cnn", "random_subsample", "rms25", "pca")
CLASSIFIERS = ("knn", "lda", "svm", "bdt")
DEFAULT_NET_PRESETS = {"ae": "ukdale-ae", "cae": "ukdale-cae", "cnn": "ukdale-cnn"}


@dataclass(frozen=True)
class ModelSpec:
    """One benchmark entry: a representation plus (except for the CNN) a classifier.

    ``feature_norm`` normalizes classifier inputs; ``norm_fit`` is
    ``"train"`` (fit on train, apply to test) or ``"per_set"`` (fit each
    set on itself).  ``dims`` is the output width of the random-subsample
    and PCA models.
    """

    model: str
    classifier: str | None = None
    feature_norm: str = "maxabs"
    norm_fit: str = "train"
    dims: int = 212
    net: nn.NetConfig | None = None
    feature_config: FeatureConfig | None = None
    classifier_params: tuple[tuple[str, Any], ...] = ()

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}; choose from {MODELS}")
        if self.model == "cnn":
            if self.classifier is not None:
                raise ValueError("the CNN is end-to-end and takes no classifier")
        elif self.classifier not in CLASSIFIERS:
            raise ValueError(f"model {self.model!r} needs a classifier from {CLASSIFIERS}")
        if self.norm_fit not in ("train", "per_set"):
            raise ValueError("norm_fit must be 'train' or 'per_set'")
        if self.net is not None and self.net.architecture.value != self.model:
            raise ValueError(f"net config for {self.net.architecture.value} given to {self.model}")

    def representation_key(self) -> str:
        parts = [self.model]
        if self.model in ("random_subsample", "pca"):
            parts.append(f"dims={self.dims}")
        if self.net is not None:
            parts.append(json.dumps(self.net.to_dict(), sort_keys=True))
        if self.feature_config is not None:
            parts.append(repr(self.feature_config))
        return "|".join(parts)

    def describe(self) -> dict[str, Any]:
        d: dict[str, Any] = {"model": self.model, "classifier": self.classifier}
        if self.model != "cnn":
            d["feature_norm"] = self.feature_norm
            d["norm_fit"] = self.norm_fit
        if self.model in ("random_subsample", "pca"):
            d["dims"] = self.dims
        if self.net is not None:
            d["net"] = self.net.to_dict()
        if self.feature_config is not None:
            d["feature_groups"] = list(self.feature_config.groups)
            d["n_harmonics"] = self.feature_config.n_harmonics
        if self.classifier_params:
            d["classifier_params"] = dict(self.classifier_params)
        return d


def default_net(model: str, context: SamplingContext, epochs: int | None = None,
                preset_name: str | None = None) -> nn.NetConfig:
    return nn.scale_config(nn.preset(preset_name or DEFAULT_NET_PRESETS[model]), context, epochs)


def standard_suite(context: SamplingContext, models: Sequence[str] = MODELS,
                   classifiers: Sequence[str] = CLASSIFIERS, epochs: int | None = None,
                   presets: dict[str, str] | None = None, **common) -> list[ModelSpec]:
    """Every requested model crossed with every classifier; the CNN appears once."""
    presets = presets or {}
    specs = []
    for m in models:
        net = None
        if m in DEFAULT_NET_PRESETS:
            net = default_net(m, context, epochs, presets.get(m))
        if m == "cnn":
            specs.append(ModelSpec("cnn", None, net=net))
            continue
        for c in classifiers:
            specs.append(ModelSpec(m, c, net=net, **common))
    return specs


@dataclass
class _Split:
    train: np.ndarray       # network training part
    validation: np.ndarray
    test: np.ndarray

    @property
    def fit(self) -> np.ndarray:   # classifier training part
        return np.sort(np.concatenate([self.train, self.validation]))


@dataclass
class _Representation:
    fit: FeatureMatrix | None = None
    test: FeatureMatrix | None = None
    predictions: np.ndarray | None = None
    artifacts: dict[str, Any] = field(default_factory=dict)
    extra: dict[str, Any] = field(default_factory=dict)
    seconds: float = 0.0


def _raw_inputs(dataset: LabeledDataset, net_cfg: nn.NetConfig | None, flat: bool) -> np.ndarray:
    x = dataset.currents()
    if net_cfg is not None and net_cfg.use_voltage:
        x = np.stack([x, dataset.voltages()], axis=1)
        return x.reshape(x.shape[0], -1) if flat else x
    return x if flat else x[:, None, :]


def _build_representation(spec: ModelSpec, dataset: LabeledDataset, split: _Split,
                          rng: Rng) -> _Representation:
    t0 = time.perf_counter()
    rep = _Representation()
    labels = tuple(dataset.labels)
    classes = dataset.class_names
    fit_idx, test_idx = split.fit, split.test

    def matrix(values, idx, names=None):
        names = names or tuple(f"dim_{j}" for j in range(values.shape[1]))
        return FeatureMatrix(values, names, tuple(labels[i] for i in idx), classes)

    m = spec.model
    if m in ("handcrafted", "rms25", "random_subsample"):
        if m == "handcrafted":
            extractor = handcrafted_extractor(spec.feature_config)
        elif m == "rms25":
            extractor = rms25
        else:
            n = dataset.context.samples_per_segment
            dims = min(spec.dims, n)
            if dims != spec.dims:
                rep.extra["dims_used"] = dims
            extractor = RandomSubsampler(n, dims, rng)
            rep.artifacts["subsample_indices"] = extractor.indices
        rep.fit = extract_matrix(dataset.subset(fit_idx), extractor)
        rep.test = extract_matrix(dataset.subset(test_idx), extractor)
    elif m == "pca":
        x = dataset.currents()
        k = min(spec.dims, fit_idx.size - 1, x.shape[1])
        if k != spec.dims:
            rep.extra["dims_used"] = k
        state = fit_pca(x[fit_idx], k)
        rep.artifacts["pca"] = state
        names = tuple(f"pc_{j}" for j in range(k))
        rep.fit = matrix(state.transform(x[fit_idx]), fit_idx, names)
        rep.test = matrix(state.transform(x[test_idx]), test_idx, names)
    else:
        cfg = spec.net
        flat = m == "ae"
        x = _raw_inputs(dataset, cfg, flat)
        flat_x = x.reshape(x.shape[0], -1)
        norm = fit_norm(flat_x[split.train], cfg.input_norm)
        xn = norm.transform(flat_x).reshape(x.shape)
        rep.artifacts["input_norm"] = norm
        y = dataset.label_indices()
        net = nn.build_from_config(cfg, dataset.context, len(classes))
        if m == "cnn":
            data, val = (xn[split.train], y[split.train]), (xn[split.validation], y[split.validation])
        else:
            data, val = (xn[split.train], xn[split.train]), (xn[split.validation], xn[split.validation])
        net, history = nn.train_network(net, data, val, cfg, rng)
        rep.artifacts["network"] = net
        rep.extra["epochs_run"] = history.epochs_run
        rep.extra["best_epoch"] = history.best_epoch
        if m == "cnn":
            rep.predictions = nn.predict_cnn(net, xn[test_idx])
        else:
            rep.fit = matrix(nn.encode(net, xn[fit_idx]), fit_idx)
            rep.test = matrix(nn.encode(net, xn[test_idx]), test_idx)
    rep.seconds = time.perf_counter() - t0
    return rep


def _active_power(dataset: LabeledDataset, idx: np.ndarray) -> np.ndarray:
    classes = dataset.class_names
    y = dataset.label_indices()[idx]
    p = np.array([float(np.mean(dataset.segments[i].current * dataset.segments[i].voltage)) for i in idx])
    out = np.zeros(len(classes))
    for c in range(len(classes)):
        if np.any(y == c):
            out[c] = float(np.mean(p[y == c]))
    return out


def _evaluate(spec: ModelSpec, rep: _Representation, dataset: LabeledDataset, split: _Split,
              rng: Rng, power: np.ndarray) -> EvalReport:
    t0 = time.perf_counter()
    classes = dataset.class_names
    truth = [dataset.segments[i].label for i in split.test]
    artifacts = dict(rep.artifacts)
    if spec.model == "cnn":
        predicted = [classes[i] for i in rep.predictions]
        n_train = int(split.train.size)
    else:
        if spec.norm_fit == "train":
            state = fit_norm(rep.fit, spec.feature_norm)
            fit_m, test_m = apply(state, rep.fit), apply(state, rep.test)
            artifacts["feature_norm"] = state
        else:
            fit_m, test_m = fit_apply_per_set(rep.fit, rep.test, spec.feature_norm)
        model = classify.train(spec.classifier, fit_m, dict(spec.classifier_params), rng)
        artifacts["classifier"] = model
        predicted = model.predict(test_m)
        n_train = int(split.fit.size)
    report = EvalReport(
        model=spec.describe(),
        metrics=macro_metrics(truth, predicted, classes),
        confusion=confusion(truth, predicted, classes),
        mean_active_power=power,
        n_train=n_train,
        n_test=int(split.test.size),
        runtime_seconds=rep.seconds + time.perf_counter() - t0,
        extra=dict(rep.extra),
        artifacts=artifacts,
    )
    return report


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("NILM_THREADS", "1")))
    except ValueError:
        return 1


def run_benchmark(dataset: LabeledDataset, models: Sequence[ModelSpec],
                  spec: SplitSpec | None, rng: Rng) -> list[EvalReport]:
    """Evaluate ``models`` on one shared split; reports follow input order.

    Representations (features, trained networks) are computed once and
    shared by all classifiers that use them.  ``NILM_THREADS`` caps the
    number of representations built concurrently.
    """
    if not models:
        raise ValueError("no models given")
    models = [dataclasses.replace(m, net=default_net(m.model, dataset.context))
              if m.net is None and m.model in DEFAULT_NET_PRESETS else m for m in models]
    spec = spec or SplitSpec()
    spec = SplitSpec(spec.test_fraction, spec.validation_fraction, spec.stratified, True)
    idx = split_indices(dataset.label_indices(), spec, rng)
    split = _Split(idx["train"], idx["validation"], idx["test"])
    base = child_seed(rng)
    power = _active_power(dataset, split.test)

    keys = []
    for m in models:
        if m.representation_key() not in keys:
            keys.append(m.representation_key())
    first = {k: next(m for m in models if m.representation_key() == k) for k in keys}

    def build(key):
        log.info("building representation %s", first[key].model)
        return _build_representation(first[key], dataset, split, make_rng(base, "rep", key))

    if _threads() > 1 and len(keys) > 1:
        with ThreadPoolExecutor(_threads()) as pool:
            reps = dict(zip(keys, pool.map(build, keys)))
    else:
        reps = {k: build(k) for k in keys}

    reports = []
    for m in models:
        key = m.representation_key()
        clf_rng = make_rng(base, "clf", key, m.classifier or "", m.feature_norm, m.norm_fit)
        reports.append(_evaluate(m, reps[key], dataset, split, clf_rng, power))
    return reports


# -- output -----------------------------------------------------------------

def reports_json(reports: Sequence[EvalReport]) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=2, sort_keys=True) + "\n"


def results_csv(reports: Sequence[EvalReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["model", "classifier", "macro_precision", "macro_recall", "macro_f_score",
                "n_train", "n_test"])
    for r in reports:
        m = r.metrics
        w.writerow([r.model["model"], r.model["classifier"] or "", repr(m.macro_precision),
                    repr(m.macro_recall), repr(m.macro_f), r.n_train, r.n_test])
    return buf.getvalue()


def timings_csv(reports: Sequence[EvalReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["model", "classifier", "runtime_seconds"])
    for r in reports:
        w.writerow([r.model["model"], r.model["classifier"] or "", f"{r.runtime_seconds:.3f}"])
    return buf.getvalue()


def write_reports(reports: Sequence[EvalReport], out_dir: str | Path) -> dict[str, Path]:
    """Write ``reports.json`` and ``results.csv`` (reproducible) and ``timings.csv``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"json": out / "reports.json", "csv": out / "results.csv", "timings": out / "timings.csv"}
    paths["json"].write_text(reports_json(reports))
    paths["csv"].write_text(results_csv(reports))
    paths["timings"].write_text(timings_csv(reports))
    return paths


def format_table(reports: Sequence[EvalReport]) -> str:
    """Macro F-scores with models as rows and classifiers as columns."""
    cols = [c for c in CLASSIFIERS if any(r.model["classifier"] == c for r in reports)]
    if any(r.model["classifier"] is None for r in reports):
        cols.append("end-to-end")
    rows: dict[str, dict[str, float]] = {}
    for r in reports:
        rows.setdefault(r.model["model"], {})[r.model["classifier"] or "end-to-end"] = r.macro_f
    width = max([len("model")] + [len(m) for m in rows]) + 2
    lines = ["model".ljust(width) + "".join(c.rjust(12) for c in cols)]
    for m, vals in rows.items():
        lines.append(m.ljust(width) + "".join(
            (f"{vals[c]:.3f}" if c in vals else "-").rjust(12) for c in cols))
    return "\n".join(lines)
