"""Loss functions returning ``(value, gradient w.r.t. the prediction)``."""

from __future__ import annotations

import numpy as np

from .layers import softmax


def mse(pred, target):
    diff = pred - target
    return float(np.mean(diff * diff)), 2.0 * diff / diff.size


def softmax_cross_entropy(logits, labels):
    """Mean categorical cross-entropy of integer ``labels`` under softmax(logits).

    The gradient is taken w.r.t. the logits, fusing the softmax layer.
    """
    labels = np.asarray(labels, dtype=np.int64)
    b = logits.shape[0]
    z = logits - np.max(logits, axis=1, keepdims=True)
    log_p = z - np.log(np.sum(np.exp(z), axis=1, keepdims=True))
    loss = -float(np.mean(log_p[np.arange(b), labels]))
    grad = softmax(logits)
    grad[np.arange(b), labels] -= 1.0
    return loss, grad / b


def l2_penalty(weights, coef):
    """Value and gradients of ``coef * sum(W**2)`` over the given weight arrays."""
    value = coef * sum(float(np.sum(w * w)) for w in weights)
    return value, [2.0 * coef * w for w in weights]
