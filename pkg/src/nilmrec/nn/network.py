"""Sequential container tying layers, shapes and parameter bookkeeping together."""

from __future__ import annotations

import numpy as np

from ..errors import DimMismatch
from .layers import GaussianNoise, Layer, Softmax


class Network:
    """An ordered stack of layers for one of the AE, CAE or CNN architectures.

    Parameters are allocated lazily by :meth:`init`, so very wide
    architectures can be constructed and inspected without the memory cost.

    ``coding_index`` is the index of the layer whose output is the learned
    code (AE/CAE only).
    """

    def __init__(self, layers: list[Layer], input_shape, architecture: str,
                 coding_index: int | None = None, n_classes: int | None = None):
        self.layers = list(layers)
        self.input_shape = tuple(int(s) for s in input_shape)
        self.architecture = architecture
        self.coding_index = coding_index
        self.n_classes = n_classes
        self.initialized = False
        shape = self.input_shape
        self.shapes = [shape]
        for layer in self.layers:
            shape = layer.build(shape)
            self.shapes.append(shape)

    @property
    def output_shape(self):
        return self.shapes[-1]

    @property
    def coding_shape(self):
        if self.coding_index is None:
            raise ValueError(f"{self.architecture} network has no coding layer")
        return self.shapes[self.coding_index + 1]

    @property
    def coding_width(self) -> int:
        return int(np.prod(self.coding_shape))

    def n_params(self) -> int:
        return sum(int(np.prod(s)) for layer in self.layers for s in layer.param_shapes().values())

    def init(self, rng):
        for layer in self.layers:
            layer.init(rng)
        self.initialized = True

    def set_rng(self, rng):
        for layer in self.layers:
            if isinstance(layer, GaussianNoise):
                layer.rng = rng

    def _check_input(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == len(self.input_shape) and x.shape == self.input_shape:
            x = x[None]
        if x.shape[1:] != self.input_shape:
            raise DimMismatch(f"network expects input {self.input_shape}, got {x.shape[1:]}")
        if not self.initialized:
            raise RuntimeError("network parameters not initialized")
        return x

    def forward(self, x, training=False, stop=None):
        x = self._check_input(x)
        for layer in self.layers[:stop]:
            x = layer.forward(x, training)
        return x

    def backward(self, dout, stop=None):
        for layer in reversed(self.layers[:stop]):
            dout = layer.backward(dout)
        return dout

    def zero_grad(self):
        for layer in self.layers:
            layer.zero_grad()

    def parameters(self):
        """(param, grad, is_weight) triples in a fixed order."""
        out = []
        for layer in self.layers:
            for name in sorted(layer.params):
                out.append((layer.params[name], layer.grads[name], name == "W"))
        return out

    def get_state(self) -> list[dict[str, np.ndarray]]:
        return [{**{f"p:{k}": v.copy() for k, v in layer.params.items()},
                 **{f"b:{k}": v.copy() for k, v in layer.buffers.items()}}
                for layer in self.layers]

    def set_state(self, state):
        for layer, entries in zip(self.layers, state):
            for key, value in entries.items():
                kind, name = key.split(":", 1)
                target = layer.params if kind == "p" else layer.buffers
                target[name] = value.copy()
        for layer in self.layers:
            if layer.params and set(layer.grads) != set(layer.params):
                layer.zero_grad()
        self.initialized = True

    @property
    def ends_in_softmax(self) -> bool:
        return bool(self.layers) and isinstance(self.layers[-1], Softmax)

    def predict_batches(self, x, batch_size=256, stop=None):
        x = self._check_input(x)
        outs = [self.forward(x[i:i + batch_size], False, stop) for i in range(0, x.shape[0], batch_size)]
        return np.concatenate(outs, axis=0)

    def summary(self) -> str:
        lines = [f"{self.architecture} input {self.input_shape}"]
        for i, (layer, shape) in enumerate(zip(self.layers, self.shapes[1:])):
            mark = "  <- coding" if i == self.coding_index else ""
            cfg = ", ".join(f"{k}={v}" for k, v in layer.config().items())
            lines.append(f"  {i:2d} {layer.name}({cfg}) -> {shape}{mark}")
        return "\n".join(lines)
