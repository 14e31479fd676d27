"""K-nearest-neighbour, LDA, linear one-vs-one SVM and a Gini decision tree.

All four share :func:`train` / :func:`predict`.  Class identifiers are kept
in a fixed order (``classes``); every tie-break resolves towards the lower
class index so predictions are deterministic.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .core import Rng
from .errors import DimMismatch, EmptyTrainSet, SingleClass
from .features import FeatureMatrix


class ClassifierKind(str, enum.Enum):
    KNN = "knn"
    LDA = "lda"
    SVM = "svm"
    BDT = "bdt"


DEFAULTS: dict[ClassifierKind, dict[str, Any]] = {
    ClassifierKind.KNN: {"k": 5},
    ClassifierKind.LDA: {"shrinkage": 1e-6},
    ClassifierKind.SVM: {"reg": 1e-3, "epochs": 200, "step": 1.0},
    ClassifierKind.BDT: {"max_depth": 16, "min_leaf": 2},
}


@dataclass(eq=False)
class TrainedClassifier:
    """A fitted classifier.  ``params`` holds the kind-specific arrays."""

    kind: ClassifierKind
    classes: tuple[str, ...]
    n_features: int
    hyperparams: dict[str, Any]
    params: dict[str, np.ndarray] = field(default_factory=dict)

    def predict_indices(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.n_features:
            raise DimMismatch(f"classifier expects {self.n_features} features, got {x.shape}")
        return _PREDICT[self.kind](self, x)

    def predict(self, matrix) -> list[str]:
        x = matrix.values if isinstance(matrix, FeatureMatrix) else matrix
        return [self.classes[i] for i in self.predict_indices(x)]


def train(kind: ClassifierKind | str, train_set: FeatureMatrix,
          hyperparams: dict[str, Any] | None = None,
          rng: Rng | None = None) -> TrainedClassifier:
    """Fit a classifier of ``kind`` on ``train_set``.

    ``rng`` is accepted for interface uniformity; the current training
    procedures are all deterministic given the data.
    """
    kind = ClassifierKind(kind)
    hp = dict(DEFAULTS[kind])
    hp.update(hyperparams or {})
    x = train_set.values
    if x.shape[0] == 0:
        raise EmptyTrainSet("no training samples")
    if not np.all(np.isfinite(x)):
        raise ValueError("training features contain non-finite values")
    y = train_set.label_indices()
    present = np.unique(y)
    if present.size < 2:
        raise SingleClass("at least two classes are required")
    model = TrainedClassifier(kind, train_set.class_names, x.shape[1], hp)
    _FIT[kind](model, x, y)
    return model


def predict(model: TrainedClassifier, matrix) -> list[str]:
    return model.predict(matrix)


# -- KNN ---------------------------------------------------------------------

def _fit_knn(model, x, y):
    if model.hyperparams["k"] < 1:
        raise ValueError("k must be >= 1")
    model.params = {"x": x.copy(), "y": y.copy()}


def _predict_knn(model, x, chunk=512):
    xt, yt = model.params["x"], model.params["y"]
    k = min(int(model.hyperparams["k"]), xt.shape[0])
    n_classes = len(model.classes)
    sq_t = np.einsum("ij,ij->i", xt, xt)
    out = np.empty(x.shape[0], dtype=np.int64)
    for start in range(0, x.shape[0], chunk):
        xb = x[start:start + chunk]
        d2 = np.einsum("ij,ij->i", xb, xb)[:, None] + sq_t[None, :] - 2.0 * xb @ xt.T
        # stable sort: equal distances resolve to the earlier training row
        nn = np.argsort(d2, axis=1, kind="stable")[:, :k]
        votes = np.zeros((xb.shape[0], n_classes), dtype=np.int64)
        np.add.at(votes, (np.repeat(np.arange(xb.shape[0]), k), yt[nn].ravel()), 1)
        out[start:start + chunk] = np.argmax(votes, axis=1)
    return out


# -- LDA ---------------------------------------------------------------------

def _fit_lda(model, x, y):
    n, d = x.shape
    n_classes = len(model.classes)
    means = np.zeros((n_classes, d))
    counts = np.bincount(y, minlength=n_classes).astype(np.float64)
    np.add.at(means, y, x)
    seen = counts > 0
    means[seen] /= counts[seen, None]
    centred = x - means[y]
    dof = n - int(seen.sum())
    cov = centred.T @ centred / (dof if dof > 0 else n)
    lam = model.hyperparams["shrinkage"] * np.trace(cov) / d
    if lam <= 0:
        lam = 1e-12
    precision = np.linalg.inv(cov + lam * np.eye(d))
    # discriminants only for classes present in training
    present = np.flatnonzero(seen)
    coef = means[present] @ precision
    intercept = -0.5 * np.einsum("ij,ij->i", coef, means[present]) + np.log(counts[present] / n)
    model.params = {"means": means[present], "precision": precision,
                    "priors": counts[present] / n, "classes": present,
                    "coef": coef, "intercept": intercept}


def _predict_lda(model, x):
    scores = x @ model.params["coef"].T + model.params["intercept"]
    return model.params["classes"][np.argmax(scores, axis=1)]


# -- linear one-vs-one SVM ---------------------------------------------------

def svm_objective(w, b, x, y, reg):
    margins = 1.0 - y * (x @ w + b)
    return 0.5 * reg * float(w @ w) + float(np.mean(np.maximum(margins, 0.0)))


def train_binary_svm(x, y, reg=1e-3, epochs=200, step=1.0):
    """Full-batch subgradient descent on the L2-regularized hinge loss.

    ``y`` holds +1/-1.  A step is accepted only if it does not raise the
    objective; otherwise the step size is halved and retried, so the
    recorded objective history is non-increasing.  Accepted steps double
    the step size again, up to ``step``.
    """
    n, d = x.shape
    w = np.zeros(d)
    b = 0.0
    obj = svm_objective(w, b, x, y, reg)
    history = [obj]
    eta = step
    for _ in range(epochs):
        active = (1.0 - y * (x @ w + b)) > 0
        gw = reg * w - (y[active] @ x[active]) / n
        gb = -float(np.sum(y[active])) / n
        accepted = False
        for _ in range(40):
            w_new, b_new = w - eta * gw, b - eta * gb
            obj_new = svm_objective(w_new, b_new, x, y, reg)
            if obj_new <= obj:
                w, b, obj = w_new, b_new, obj_new
                accepted = True
                eta = min(2.0 * eta, step)
                break
            eta *= 0.5
        history.append(obj)
        if not accepted:
            break
    return w, b, history


def _fit_svm(model, x, y):
    hp = model.hyperparams
    present = np.unique(y)
    pairs, weights, biases = [], [], []
    for ai, a in enumerate(present):
        for b_ in present[ai + 1:]:
            mask = (y == a) | (y == b_)
            target = np.where(y[mask] == a, 1.0, -1.0)
            w, b, _ = train_binary_svm(x[mask], target, hp["reg"], int(hp["epochs"]), hp["step"])
            pairs.append((a, b_))
            weights.append(w)
            biases.append(b)
    model.params = {"pairs": np.array(pairs, dtype=np.int64),
                    "weights": np.array(weights), "biases": np.array(biases)}


def _predict_svm(model, x):
    pairs = model.params["pairs"]
    f = x @ model.params["weights"].T + model.params["biases"]
    n_classes = len(model.classes)
    votes = np.zeros((x.shape[0], n_classes))
    margin = np.zeros((x.shape[0], n_classes))
    for j, (a, b) in enumerate(pairs):
        pos = f[:, j] >= 0
        votes[:, a] += pos
        votes[:, b] += ~pos
        margin[:, a] += f[:, j]
        margin[:, b] -= f[:, j]
    # most votes, then largest aggregate margin, then lowest index
    best = np.empty(x.shape[0], dtype=np.int64)
    for i in range(x.shape[0]):
        cand = np.flatnonzero(votes[i] == votes[i].max())
        best[i] = cand[np.argmax(margin[i, cand])]
    return best


# -- binary decision tree ----------------------------------------------------

def _gini_from_counts(counts):
    tot = counts.sum(axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        p = counts / tot[..., None]
    return np.where(tot > 0, 1.0 - np.sum(p * p, axis=-1), 0.0)


def _best_split(x, onehot, min_leaf):
    """Return (dim, threshold, impurity) of the best Gini split or None."""
    m, d = x.shape
    if m < 2 * min_leaf:
        return None
    order = np.argsort(x, axis=0, kind="stable")
    xs = np.take_along_axis(x, order, axis=0)
    left = np.cumsum(onehot[order], axis=0)            # (m, d, K)
    total = left[-1]
    nl = np.arange(1, m + 1)[:, None]
    # split after row r: left = rows[0..r]
    valid = np.zeros((m, d), dtype=bool)
    valid[:-1] = xs[1:] > xs[:-1]
    valid[:min_leaf - 1] = False
    valid[m - min_leaf:] = False
    if not valid.any():
        return None
    gl = _gini_from_counts(left)
    gr = _gini_from_counts(total[None] - left)
    imp = (nl * gl + (m - nl) * gr) / m
    imp = np.where(valid, imp, np.inf)
    # row-major over (dim, row) after transpose: lowest dim, then lowest threshold
    flat = int(np.argmin(imp.T))
    dim, row = divmod(flat, m)
    thr = 0.5 * (xs[row, dim] + xs[row + 1, dim])
    return dim, thr, float(imp[row, dim])


def _fit_bdt(model, x, y):
    hp = model.hyperparams
    max_depth, min_leaf = int(hp["max_depth"]), max(1, int(hp["min_leaf"]))
    n_classes = len(model.classes)
    onehot = np.eye(n_classes)[y]
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node(idx):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        counts = onehot[idx].sum(axis=0)
        value.append(int(np.argmax(counts)))
        return len(feature) - 1, counts

    root, root_counts = new_node(np.arange(x.shape[0]))
    stack = [(root, np.arange(x.shape[0]), 0, root_counts)]
    while stack:
        node, idx, depth, counts = stack.pop()
        parent_imp = float(_gini_from_counts(counts))
        if depth >= max_depth or parent_imp == 0.0:
            continue
        split = _best_split(x[idx], onehot[idx], min_leaf)
        if split is None or split[2] >= parent_imp - 1e-12:
            continue
        dim, thr, _ = split
        go_left = x[idx, dim] <= thr
        li, ri = idx[go_left], idx[~go_left]
        ln, lc = new_node(li)
        rn, rc = new_node(ri)
        feature[node], threshold[node], left[node], right[node] = dim, thr, ln, rn
        stack.append((rn, ri, depth + 1, rc))
        stack.append((ln, li, depth + 1, lc))
    model.params = {"feature": np.array(feature, dtype=np.int64),
                    "threshold": np.array(threshold), "left": np.array(left, dtype=np.int64),
                    "right": np.array(right, dtype=np.int64), "value": np.array(value, dtype=np.int64)}


def _predict_bdt(model, x):
    p = model.params
    node = np.zeros(x.shape[0], dtype=np.int64)
    while True:
        feat = p["feature"][node]
        inner = feat >= 0
        if not inner.any():
            break
        rows = np.flatnonzero(inner)
        go_left = x[rows, feat[rows]] <= p["threshold"][node[rows]]
        node[rows] = np.where(go_left, p["left"][node[rows]], p["right"][node[rows]])
    return p["value"][node]


def tree_depth(model: TrainedClassifier) -> int:
    p = model.params
    depth, frontier = 0, [0]
    while True:
        nxt = [c for n in frontier if p["feature"][n] >= 0 for c in (p["left"][n], p["right"][n])]
        if not nxt:
            return depth
        depth += 1
        frontier = nxt


_FIT = {ClassifierKind.KNN: _fit_knn, ClassifierKind.LDA: _fit_lda,
        ClassifierKind.SVM: _fit_svm, ClassifierKind.BDT: _fit_bdt}
_PREDICT = {ClassifierKind.KNN: _predict_knn, ClassifierKind.LDA: _predict_lda,
            ClassifierKind.SVM: _predict_svm, ClassifierKind.BDT: _predict_bdt}
