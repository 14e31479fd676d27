"""Independent reference implementations used as test oracles."""

import numpy as np

from nilmrec.core import make_rng
from nilmrec.nn import layers as L


def jacobi_eigh(a, tol=1e-15, max_sweeps=100):
    """Cyclic Jacobi rotations on a symmetric matrix; returns (values, vectors) descending."""
    a = np.array(a, dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.tril(a, -1) ** 2))
        if off <= tol * max(1.0, np.abs(a).max()):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if a[p, q] == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2 * a[p, q])
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1)) if theta else 1.0
                c = 1 / np.sqrt(t * t + 1)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q], rot[q, p] = s, -s
                a = rot.T @ a @ rot
                v = v @ rot
    w = np.diag(a)
    order = np.argsort(w)[::-1]
    return w[order], v[:, order]


def pca_oracle(x, k):
    """Top-k covariance eigenvalues and the rank-k reconstruction of x."""
    mean = x.mean(axis=0)
    xc = x - mean
    cov = np.zeros((x.shape[1], x.shape[1]))
    for row in xc:
        cov += np.outer(row, row)
    cov /= x.shape[0] - 1
    w, v = jacobi_eigh(cov)
    vk = v[:, :k]
    return np.clip(w[:k], 0, None), xc @ vk @ vk.T + mean


def counting_metrics(truth, pred, classes):
    """Per-class precision/recall/F by explicit TP/FP/FN loops."""
    pr, re, f = [], [], []
    for c in classes:
        tp = fp = fn = 0
        for t, p in zip(truth, pred):
            if t == c and p == c:
                tp += 1
            elif t != c and p == c:
                fp += 1
            elif t == c and p != c:
                fn += 1
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        fs = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        pr.append(precision)
        re.append(recall)
        f.append(fs)
    return pr, re, f


def rel_error(a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    denom = max(np.linalg.norm(a), np.linalg.norm(b), 1e-12)
    return float(np.linalg.norm(a - b) / denom)


def numeric_grad(f, x, eps=1e-5):
    """Central differences of scalar f() w.r.t. every entry of x (modified in place)."""
    g = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        i = it.multi_index
        old = x[i]
        x[i] = old + eps
        up = f()
        x[i] = old - eps
        down = f()
        x[i] = old
        g[i] = (up - down) / (2 * eps)
    return g


def layer_gradcheck(layer, x, rng, training=True, eps=1e-5, reset=None):
    """Worst relative error of a layer's input and parameter gradients.

    The scalar objective is sum(out * r) for a fixed random r.  ``reset`` is
    called before every forward pass (to re-seed stochastic layers).
    """
    reset = reset or (lambda: None)
    reset()
    out = layer.forward(x, training)
    r = rng.normal(size=out.shape)

    def objective():
        reset()
        return float(np.sum(layer.forward(x, training) * r))

    reset()
    layer.forward(x, training)
    layer.zero_grad()
    dx = layer.backward(r)
    errors = [rel_error(dx, numeric_grad(objective, x, eps))]
    analytic = {k: v.copy() for k, v in layer.grads.items()}
    for name, p in layer.params.items():
        errors.append(rel_error(analytic[name], numeric_grad(objective, p, eps)))
    return max(errors)


def make_layer(kind, rng):
    """A small built layer of ``kind`` and a matching random input batch."""
    if kind == "dense":
        layer, shape = L.Dense(4), (5,)
    elif kind == "conv1d":
        layer, shape = L.Conv1D(3, 5), (2, 12)
    elif kind == "maxpool1d":
        layer, shape = L.MaxPool1D(3), (2, 12)
    elif kind == "upsample1d":
        layer, shape = L.Upsample1D(2), (2, 6)
    elif kind == "batchnorm":
        layer, shape = L.BatchNorm(), (3, 7) if rng.random() < 0.5 else (6,)
    elif kind == "leaky_relu":
        layer, shape = L.LeakyReLU(0.1), (9,)
    elif kind == "gaussian_noise":
        layer, shape = L.GaussianNoise(0.3), (6,)
    elif kind == "flatten":
        layer, shape = L.Flatten(), (3, 4)
    elif kind == "softmax":
        layer, shape = L.Softmax(), (5,)
    layer.build(shape)
    layer.init(rng)
    if layer.params:
        for k in layer.params:   # move BN away from its trivial init
            layer.params[k] = layer.params[k] + 0.3 * rng.normal(size=layer.params[k].shape)
    return layer, rng.normal(size=(4, *shape))


def gradcheck_layer_type(kind, seed):
    """Worst relative gradient error of one random instance of a layer type."""
    rng = make_rng(seed, "grad", kind)
    layer, x = make_layer(kind, rng)
    reset = None
    if kind == "gaussian_noise":
        def reset():
            layer.rng = make_rng(seed, "noise")
    return layer_gradcheck(layer, x, rng, training=True, reset=reset)
