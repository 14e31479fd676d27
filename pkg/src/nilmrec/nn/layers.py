"""Layer implementations with explicit forward/backward passes.

Tensors are float64.  Dense layers take ``(batch, features)``; temporal
layers take ``(batch, channels, length)``.  Shapes passed to :meth:`build`
exclude the batch axis.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


class Layer:
    """Base class.  Subclasses fill ``params`` in :meth:`init` and ``grads`` in backward."""

    name = "layer"

    def __init__(self):
        self.params: dict[str, np.ndarray] = {}
        self.grads: dict[str, np.ndarray] = {}
        self.buffers: dict[str, np.ndarray] = {}
        self.in_shape: tuple[int, ...] | None = None
        self.out_shape: tuple[int, ...] | None = None

    def build(self, in_shape):
        self.in_shape = tuple(in_shape)
        self.out_shape = self._out_shape(self.in_shape)
        return self.out_shape

    def _out_shape(self, in_shape):
        return in_shape

    def param_shapes(self) -> dict[str, tuple[int, ...]]:
        return {}

    def init(self, rng):
        pass

    def forward(self, x, training=False):
        raise NotImplementedError

    def backward(self, dout):
        raise NotImplementedError

    def config(self) -> dict:
        return {}

    def zero_grad(self):
        self.grads = {k: np.zeros_like(v) for k, v in self.params.items()}


def glorot_uniform(rng, shape, fan_in, fan_out):
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


class Dense(Layer):
    name = "dense"

    def __init__(self, units: int):
        super().__init__()
        self.units = int(units)

    def _out_shape(self, in_shape):
        if len(in_shape) != 1:
            raise ValueError(f"dense layer needs flat input, got {in_shape}")
        return (self.units,)

    def param_shapes(self):
        return {"W": (self.in_shape[0], self.units), "b": (self.units,)}

    def init(self, rng):
        n_in = self.in_shape[0]
        self.params = {"W": glorot_uniform(rng, (n_in, self.units), n_in, self.units),
                       "b": np.zeros(self.units)}
        self.zero_grad()

    def forward(self, x, training=False):
        self._x = x
        return x @ self.params["W"] + self.params["b"]

    def backward(self, dout):
        self.grads["W"] += self._x.T @ dout
        self.grads["b"] += dout.sum(axis=0)
        return dout @ self.params["W"].T

    def config(self):
        return {"units": self.units}


class Conv1D(Layer):
    """Stride-1 convolution with odd kernel and zero 'same' padding."""

    name = "conv1d"

    def __init__(self, filters: int, kernel: int):
        super().__init__()
        if kernel % 2 == 0:
            raise ValueError("kernel length must be odd for same padding")
        self.filters = int(filters)
        self.kernel = int(kernel)

    def _out_shape(self, in_shape):
        if len(in_shape) != 2:
            raise ValueError(f"conv1d needs (channels, length) input, got {in_shape}")
        return (self.filters, in_shape[1])

    def param_shapes(self):
        return {"W": (self.filters, self.in_shape[0], self.kernel), "b": (self.filters,)}

    def init(self, rng):
        c = self.in_shape[0]
        shape = (self.filters, c, self.kernel)
        self.params = {"W": glorot_uniform(rng, shape, c * self.kernel, self.filters * self.kernel),
                       "b": np.zeros(self.filters)}
        self.zero_grad()

    def forward(self, x, training=False):
        b, c, length = x.shape
        pad = self.kernel // 2
        xp = np.pad(x, ((0, 0), (0, 0), (pad, pad)))
        # (b, c, L, k) -> (b, L, c*k)
        cols = sliding_window_view(xp, self.kernel, axis=2).transpose(0, 2, 1, 3)
        cols = cols.reshape(b, length, c * self.kernel)
        self._cols = cols
        w = self.params["W"].reshape(self.filters, -1)
        out = cols @ w.T + self.params["b"]
        return out.transpose(0, 2, 1)

    def backward(self, dout):
        b, _, length = dout.shape
        c = self.in_shape[0]
        k = self.kernel
        d2 = dout.transpose(0, 2, 1)                         # (b, L, o)
        self.grads["W"] += (d2.reshape(-1, self.filters).T
                            @ self._cols.reshape(-1, c * k)).reshape(self.params["W"].shape)
        self.grads["b"] += dout.sum(axis=(0, 2))
        # dx is the correlation of dout with the flipped kernel
        pad = k // 2
        dp = np.pad(dout, ((0, 0), (0, 0), (pad, pad)))
        dcols = sliding_window_view(dp, k, axis=2).transpose(0, 2, 1, 3).reshape(b, length, -1)
        wf = self.params["W"][:, :, ::-1].transpose(0, 2, 1).reshape(self.filters * k, c)
        return (dcols @ wf).transpose(0, 2, 1)

    def config(self):
        return {"filters": self.filters, "kernel": self.kernel}


class MaxPool1D(Layer):
    name = "maxpool1d"

    def __init__(self, size: int):
        super().__init__()
        self.size = int(size)

    def _out_shape(self, in_shape):
        c, length = in_shape
        if length % self.size:
            raise ValueError(f"length {length} not divisible by pool size {self.size}")
        return (c, length // self.size)

    def forward(self, x, training=False):
        b, c, length = x.shape
        xr = x.reshape(b, c, length // self.size, self.size)
        self._arg = np.argmax(xr, axis=3)
        return np.take_along_axis(xr, self._arg[..., None], axis=3)[..., 0]

    def backward(self, dout):
        b, c, n = dout.shape
        dx = np.zeros((b, c, n, self.size))
        np.put_along_axis(dx, self._arg[..., None], dout[..., None], axis=3)
        return dx.reshape(b, c, n * self.size)

    def config(self):
        return {"size": self.size}


class Upsample1D(Layer):
    """Nearest-neighbour upsampling along the temporal axis."""

    name = "upsample1d"

    def __init__(self, factor: int):
        super().__init__()
        self.factor = int(factor)

    def _out_shape(self, in_shape):
        c, length = in_shape
        return (c, length * self.factor)

    def forward(self, x, training=False):
        return np.repeat(x, self.factor, axis=2)

    def backward(self, dout):
        b, c, length = dout.shape
        return dout.reshape(b, c, length // self.factor, self.factor).sum(axis=3)

    def config(self):
        return {"factor": self.factor}


class BatchNorm(Layer):
    """Batch normalization over the batch axis (and time, for 3-D input).

    Running statistics are exponential moving averages used in inference.
    """

    name = "batchnorm"

    def __init__(self, momentum: float = 0.9, eps: float = 1e-5):
        super().__init__()
        self.momentum = float(momentum)
        self.eps = float(eps)

    def _n(self):
        return self.in_shape[0]

    def param_shapes(self):
        return {"gamma": (self._n(),), "beta": (self._n(),)}

    def init(self, rng):
        n = self._n()
        self.params = {"gamma": np.ones(n), "beta": np.zeros(n)}
        self.buffers = {"running_mean": np.zeros(n), "running_var": np.ones(n)}
        self.zero_grad()

    def _axes(self, x):
        return (0,) if x.ndim == 2 else (0, 2)

    def _bcast(self, v, x):
        return v if x.ndim == 2 else v[None, :, None]

    def forward(self, x, training=False):
        axes = self._axes(x)
        if training:
            mu = x.mean(axis=axes)
            var = x.var(axis=axes)
            m = self.momentum
            self.buffers["running_mean"] = m * self.buffers["running_mean"] + (1 - m) * mu
            self.buffers["running_var"] = m * self.buffers["running_var"] + (1 - m) * var
        else:
            mu, var = self.buffers["running_mean"], self.buffers["running_var"]
        inv_std = 1.0 / np.sqrt(var + self.eps)
        xhat = (x - self._bcast(mu, x)) * self._bcast(inv_std, x)
        if training:
            self._cache = (xhat, inv_std, axes)
        return xhat * self._bcast(self.params["gamma"], x) + self._bcast(self.params["beta"], x)

    def backward(self, dout):
        xhat, inv_std, axes = self._cache
        self.grads["gamma"] += np.sum(dout * xhat, axis=axes)
        self.grads["beta"] += np.sum(dout, axis=axes)
        dxhat = dout * self._bcast(self.params["gamma"], dout)
        count = dout.size / dout.shape[1]
        s1 = self._bcast(dxhat.sum(axis=axes), dout)
        s2 = self._bcast(np.sum(dxhat * xhat, axis=axes), dout)
        return self._bcast(inv_std, dout) * (dxhat - s1 / count - xhat * s2 / count)

    def config(self):
        return {"momentum": self.momentum, "eps": self.eps}


class LeakyReLU(Layer):
    name = "leaky_relu"

    def __init__(self, slope: float = 0.01):
        super().__init__()
        self.slope = float(slope)

    def forward(self, x, training=False):
        self._mask = x > 0
        return np.where(self._mask, x, self.slope * x)

    def backward(self, dout):
        return np.where(self._mask, dout, self.slope * dout)

    def config(self):
        return {"slope": self.slope}


class GaussianNoise(Layer):
    """Adds N(0, std^2) noise in training mode; identity at inference."""

    name = "gaussian_noise"

    def __init__(self, std: float):
        super().__init__()
        self.std = float(std)
        self.rng = None

    def forward(self, x, training=False):
        if not training or self.std == 0.0:
            return x
        if self.rng is None:
            raise RuntimeError("noise layer has no generator; call Network.set_rng first")
        return x + self.rng.normal(0.0, self.std, size=x.shape)

    def backward(self, dout):
        return dout

    def config(self):
        return {"std": self.std}


class Flatten(Layer):
    name = "flatten"

    def _out_shape(self, in_shape):
        return (int(np.prod(in_shape)),)

    def forward(self, x, training=False):
        self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, dout):
        return dout.reshape(self._shape)


class Softmax(Layer):
    name = "softmax"

    def forward(self, x, training=False):
        self._y = softmax(x)
        return self._y

    def backward(self, dout):
        y = self._y
        return y * (dout - np.sum(dout * y, axis=-1, keepdims=True))


def softmax(z):
    z = z - np.max(z, axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


LAYER_TYPES = {cls.name: cls for cls in
               (Dense, Conv1D, MaxPool1D, Upsample1D, BatchNorm, LeakyReLU,
                GaussianNoise, Flatten, Softmax)}
