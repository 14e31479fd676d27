"""Mini-batch training with early stopping, plus inference helpers."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..core import Rng
from ..errors import DimMismatch, NonFiniteLoss
from .config import NetConfig
from .losses import l2_penalty, mse, softmax_cross_entropy
from .network import Network
from .optim import make_optimizer

log = logging.getLogger(__name__)


@dataclass
class TrainingHistory:
    train_loss: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    best_epoch: int = -1
    stopped_early: bool = False

    @property
    def epochs_run(self) -> int:
        return len(self.train_loss)


def _loss_fn(config: NetConfig):
    return softmax_cross_entropy if config.loss == "categorical_cross_entropy" else mse


def evaluate_loss(net: Network, x, y, config: NetConfig, batch_size: int = 256) -> float:
    """Mean loss over ``(x, y)`` in inference mode, without regularization."""
    loss_fn = _loss_fn(config)
    stop = -1 if (config.loss == "categorical_cross_entropy" and net.ends_in_softmax) else None
    total, n = 0.0, x.shape[0]
    for i in range(0, n, batch_size):
        out = net.forward(x[i:i + batch_size], False, stop)
        value, _ = loss_fn(out, y[i:i + batch_size])
        total += value * out.shape[0]
    return total / n


def train_network(net: Network, data, validation, config: NetConfig, rng: Rng,
                  initialize: bool = True) -> tuple[Network, TrainingHistory]:
    """Train ``net`` in place and restore the parameters with best validation loss.

    ``data`` and ``validation`` are ``(inputs, targets)`` pairs; targets are
    inputs for autoencoders and integer class indices for the CNN.  When
    ``validation`` is None the training loss drives model selection.
    """
    x, y = (np.asarray(a) for a in data)
    x = x.astype(np.float64)
    if x.shape[1:] != net.input_shape:
        raise DimMismatch(f"network expects {net.input_shape}, data is {x.shape[1:]}")
    if validation is not None:
        xv, yv = (np.asarray(a) for a in validation)
        xv = xv.astype(np.float64)
    if initialize or not net.initialized:
        net.init(rng)
    net.set_rng(rng)

    ce = config.loss == "categorical_cross_entropy"
    if ce:
        y = y.astype(np.int64)
        if validation is not None:
            yv = yv.astype(np.int64)
    loss_fn = _loss_fn(config)
    stop = -1 if (ce and net.ends_in_softmax) else None
    opt = make_optimizer(config.optimizer, config.learning_rate)
    params = net.parameters()
    weights = [p for p, _, is_w in params if is_w]

    history = TrainingHistory()
    best, best_state, wait = np.inf, net.get_state(), 0
    n = x.shape[0]
    bs = config.batch_size
    for epoch in range(config.epochs):
        perm = rng.permutation(n)
        batch_losses = []
        for start in range(0, n, bs):
            idx = perm[start:start + bs]
            if idx.size < 2 and n >= 2:
                continue  # batch statistics need at least two samples
            out = net.forward(x[idx], True, stop)
            loss, grad = loss_fn(out, y[idx])
            if config.l2 > 0:
                penalty, _ = l2_penalty(weights, config.l2)
                loss += penalty
            if not np.isfinite(loss):
                raise NonFiniteLoss(f"non-finite training loss at epoch {epoch}, batch {start // bs}",
                                    epoch, start // bs)
            net.zero_grad()
            net.backward(grad, stop)
            params = net.parameters()
            grads = [g + 2.0 * config.l2 * p if (is_w and config.l2 > 0) else g
                     for p, g, is_w in params]
            opt.step([p for p, _, _ in params], grads)
            batch_losses.append(loss)
        history.train_loss.append(float(np.mean(batch_losses)))
        monitored = (evaluate_loss(net, xv, yv, config) if validation is not None
                     else history.train_loss[-1])
        if not np.isfinite(monitored):
            raise NonFiniteLoss(f"non-finite validation loss at epoch {epoch}", epoch)
        history.val_loss.append(float(monitored))
        if monitored < best:
            best, best_state, wait = monitored, net.get_state(), 0
            history.best_epoch = epoch
        else:
            wait += 1
            if wait > config.patience:
                history.stopped_early = True
                break
    log.debug("trained %s for %d epochs, best epoch %d (loss %.4g)", net.architecture,
              history.epochs_run, history.best_epoch, best)
    net.set_state(best_state)
    return net, history


def encode(net: Network, inputs) -> np.ndarray:
    """Coding-layer activations per sample, flattened, in inference mode."""
    if net.coding_index is None:
        raise ValueError("network has no coding layer")
    out = net.predict_batches(inputs, stop=net.coding_index + 1)
    return out.reshape(out.shape[0], -1)


def predict_proba(net: Network, inputs) -> np.ndarray:
    return net.predict_batches(inputs)


def predict_cnn(net: Network, inputs) -> np.ndarray:
    """Class index per row; ties go to the lowest index."""
    return np.argmax(predict_proba(net, inputs), axis=1)
