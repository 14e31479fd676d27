"""Versioned binary container for fitted states and trained models.

Layout::

    b"NILMMDL1"
    u32 format version
    u64 header length, then the UTF-8 JSON header
    array payload: raw little-endian arrays at the offsets named in the header

The header maps each entry name to ``{"type", "meta", "arrays"}`` where
``arrays`` maps keys to ``{"dtype", "shape", "offset"}`` (offset relative
to the start of the payload).
"""

from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import Any

import numpy as np

from .classify import ClassifierKind, TrainedClassifier
from .errors import FormatError
from .nn.layers import LAYER_TYPES
from .nn.network import Network
from .transform import NormalizerState, NormKind, PcaState

MAGIC = b"NILMMDL1"
VERSION = 1


def _pack(obj) -> tuple[str, dict[str, Any], dict[str, np.ndarray]]:
    if isinstance(obj, TrainedClassifier):
        meta = {"kind": obj.kind.value, "classes": list(obj.classes),
                "n_features": obj.n_features, "hyperparams": obj.hyperparams}
        return "classifier", meta, dict(obj.params)
    if isinstance(obj, NormalizerState):
        return "normalizer", {"kind": obj.kind.value}, {
            "mean": obj.mean, "scale": obj.scale, "degenerate": obj.degenerate.astype(np.uint8)}
    if isinstance(obj, PcaState):
        return "pca", {}, {"mean": obj.mean, "components": obj.components,
                           "explained_variances": obj.explained_variances}
    if isinstance(obj, Network):
        if not obj.initialized:
            raise ValueError("cannot save an uninitialized network")
        meta = {"architecture": obj.architecture, "input_shape": list(obj.input_shape),
                "coding_index": obj.coding_index, "n_classes": obj.n_classes,
                "layers": [{"type": l.name, "config": l.config()} for l in obj.layers]}
        arrays = {}
        for i, layer in enumerate(obj.layers):
            for k, v in layer.params.items():
                arrays[f"{i}:p:{k}"] = v
            for k, v in layer.buffers.items():
                arrays[f"{i}:b:{k}"] = v
        return "network", meta, arrays
    if isinstance(obj, np.ndarray):
        return "array", {}, {"value": obj}
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _unpack(kind: str, meta: dict, arrays: dict[str, np.ndarray]):
    if kind == "classifier":
        return TrainedClassifier(ClassifierKind(meta["kind"]), tuple(meta["classes"]),
                                 int(meta["n_features"]), meta["hyperparams"], arrays)
    if kind == "normalizer":
        return NormalizerState(NormKind(meta["kind"]), arrays["mean"], arrays["scale"],
                               arrays["degenerate"].astype(bool))
    if kind == "pca":
        return PcaState(arrays["mean"], arrays["components"], arrays["explained_variances"])
    if kind == "network":
        layers = [LAYER_TYPES[spec["type"]](**spec["config"]) for spec in meta["layers"]]
        net = Network(layers, meta["input_shape"], meta["architecture"],
                      meta["coding_index"], meta["n_classes"])
        state = [{} for _ in layers]
        for key, value in arrays.items():
            i, rest = key.split(":", 1)
            state[int(i)][rest] = value
        net.set_state(state)
        return net
    if kind == "array":
        return arrays["value"]
    raise FormatError(f"unknown entry type {kind!r}")


def save_models(path: str | Path, entries: dict[str, Any]) -> None:
    """Write named objects (classifiers, normalizers, PCA states, networks, arrays)."""
    header: dict[str, Any] = {"version": VERSION, "entries": {}}
    blobs, offset = [], 0
    for name, obj in entries.items():
        kind, meta, arrays = _pack(obj)
        table = {}
        for key, arr in arrays.items():
            arr = np.ascontiguousarray(arr)
            dtype = arr.dtype.newbyteorder("<") if arr.dtype.byteorder not in ("|",) else arr.dtype
            raw = arr.astype(dtype, copy=False).tobytes()
            table[key] = {"dtype": dtype.str, "shape": list(arr.shape), "offset": offset}
            blobs.append(raw)
            offset += len(raw)
        header["entries"][name] = {"type": kind, "meta": meta, "arrays": table}
    head = json.dumps(header, sort_keys=True).encode("utf-8")
    Path(path).write_bytes(MAGIC + struct.pack("<IQ", VERSION, len(head)) + head + b"".join(blobs))


def load_models(path: str | Path) -> dict[str, Any]:
    data = Path(path).read_bytes()
    if data[:8] != MAGIC:
        raise FormatError(f"{path}: not a model file")
    try:
        version, head_len = struct.unpack_from("<IQ", data, 8)
    except struct.error as exc:
        raise FormatError(f"{path}: truncated header") from exc
    if version != VERSION:
        raise FormatError(f"{path}: unsupported model file version {version}")
    start = 8 + 12
    try:
        header = json.loads(data[start:start + head_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: malformed header") from exc
    payload = memoryview(data)[start + head_len:]
    out = {}
    for name, entry in header["entries"].items():
        arrays = {}
        for key, info in entry["arrays"].items():
            dtype = np.dtype(info["dtype"])
            count = int(np.prod(info["shape"])) if info["shape"] else 1
            end = info["offset"] + count * dtype.itemsize
            if end > len(payload):
                raise FormatError(f"{path}: array {name}/{key} runs past end of file")
            arrays[key] = np.frombuffer(payload, dtype, count, info["offset"]).reshape(info["shape"]).copy()
        out[name] = _unpack(entry["type"], entry["meta"], arrays)
    return out
