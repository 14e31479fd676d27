"""Feature normalization and PCA, fitted on training data only."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DimMismatch, KTooLarge
from .features import FeatureMatrix


class NormKind(str, enum.Enum):
    VARIANCE = "variance"
    MAXABS = "maxabs"


@dataclass(frozen=True, eq=False)
class NormalizerState:
    """Per-dimension offset and scale; ``degenerate`` marks dims forced to scale 1."""

    kind: NormKind
    mean: np.ndarray
    scale: np.ndarray
    degenerate: np.ndarray

    @property
    def n_features(self) -> int:
        return self.scale.size

    def transform(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.n_features:
            raise DimMismatch(f"state has {self.n_features} dims, input has {x.shape[-1]}")
        return (x - self.mean) / self.scale


@dataclass(frozen=True, eq=False)
class PcaState:
    mean: np.ndarray
    components: np.ndarray          # (k, d), orthonormal rows
    explained_variances: np.ndarray  # (k,), descending

    @property
    def n_features(self) -> int:
        return self.mean.size

    @property
    def k(self) -> int:
        return self.components.shape[0]

    def transform(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.n_features:
            raise DimMismatch(f"state has {self.n_features} dims, input has {x.shape[-1]}")
        return (x - self.mean) @ self.components.T

    def inverse_transform(self, z: np.ndarray) -> np.ndarray:
        return np.asarray(z) @ self.components + self.mean


def _values(m) -> np.ndarray:
    v = m.values if isinstance(m, FeatureMatrix) else np.asarray(m, dtype=np.float64)
    if v.ndim != 2 or v.shape[0] == 0:
        raise ValueError("expected a non-empty 2-D matrix")
    return v


def fit_variance_norm(train, use_std: bool = False) -> NormalizerState:
    """Center by the training mean and divide by the population variance.

    ``use_std=True`` divides by the standard deviation instead (z-score).
    Zero-variance dimensions get scale 1 and are flagged.
    """
    x = _values(train)
    mean = x.mean(axis=0)
    var = x.var(axis=0)
    degenerate = var == 0.0
    scale = np.sqrt(var) if use_std else var.copy()
    scale[degenerate] = 1.0
    return NormalizerState(NormKind.VARIANCE, mean, scale, degenerate)


def fit_maxabs_norm(train) -> NormalizerState:
    """Divide by the per-dimension maximum absolute training value."""
    x = _values(train)
    scale = np.abs(x).max(axis=0)
    degenerate = scale == 0.0
    scale[degenerate] = 1.0
    return NormalizerState(NormKind.MAXABS, np.zeros_like(scale), scale, degenerate)


def fit_norm(train, kind: NormKind | str, use_std: bool = False) -> NormalizerState:
    kind = NormKind(kind)
    if kind is NormKind.VARIANCE:
        return fit_variance_norm(train, use_std)
    return fit_maxabs_norm(train)


def fit_pca(train, k: int) -> PcaState:
    """Top-``k`` principal axes of the mean-centred training covariance.

    Uses a symmetric eigendecomposition of the covariance, or a thin SVD of
    the centred data when there are more dims than rows.  Eigenvectors are
    sign-normalized so their largest-magnitude entry is
    positive, which makes the state deterministic.
    """
    x = _values(train)
    n, d = x.shape
    if k < 1 or k > min(n - 1, d):
        raise KTooLarge(f"k={k} must be in [1, min(rows-1, dims)] = [1, {min(n - 1, d)}]")
    mean = x.mean(axis=0)
    xc = x - mean
    if d > n:
        # wide data: the thin SVD avoids forming a d x d covariance
        _, s, vt = np.linalg.svd(xc, full_matrices=False)
        evals = s * s / (n - 1)
        order = np.arange(k)
        comps = vt[:k].copy()
    else:
        evals, evecs = np.linalg.eigh(xc.T @ xc / (n - 1))
        order = np.argsort(evals, kind="stable")[::-1][:k]
        comps = evecs[:, order].T.copy()
    pivots = np.argmax(np.abs(comps), axis=1)
    signs = np.sign(comps[np.arange(k), pivots])
    comps *= signs[:, None]
    variances = np.clip(evals[order], 0.0, None)
    return PcaState(mean, comps, variances)


def apply(state: NormalizerState | PcaState, matrix):
    """Transform a :class:`FeatureMatrix` (or plain array) with a fitted state."""
    if isinstance(matrix, FeatureMatrix):
        out = state.transform(matrix.values)
        if isinstance(state, PcaState):
            return matrix.with_values(out, tuple(f"pc_{j}" for j in range(state.k)))
        return matrix.with_values(out, matrix.names)
    return state.transform(matrix)


def fit_apply_per_set(train, test, kind: NormKind | str, use_std: bool = False):
    """Normalize train and test with statistics computed on each set separately.

    This reproduces the per-set normalization reading; the leakage-free
    default elsewhere is to fit on train and apply to both.
    """
    return apply(fit_norm(train, kind, use_std), train), apply(fit_norm(test, kind, use_std), test)
