"""Adam training loop with step decay, early stopping and best-epoch restore."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .network import (IDENTITY, DenseNetwork, _as_matrix, _backprop,
                      _run_forward, forward, mse)


class TrainingDivergedError(RuntimeError):
    """Raised when the loss becomes non-finite during training."""


@dataclass
class TrainConfig:
    max_epochs: int = 300
    initial_lr: float = 0.01
    lr_decay_factor: float = 0.2
    lr_decay_every: int = 50
    early_stop_patience: int = 50
    batch_size: int = 128
    seed: int | tuple = 0

    def __post_init__(self):
        if self.early_stop_patience > self.max_epochs:
            raise ValueError("early_stop_patience must not exceed max_epochs")
        if self.batch_size < 1 or self.max_epochs < 1:
            raise ValueError("batch_size and max_epochs must be positive")


@dataclass
class TrainHistory:
    train_loss: list[float] = field(default_factory=list)
    eval_loss: list[float] = field(default_factory=list)
    learning_rate: list[float] = field(default_factory=list)
    best_epoch: int = -1
    stopped_epoch: int = -1


class _Adam:
    """Adam with bias correction over a flat list of parameter arrays."""

    def __init__(self, shapes, lr: float, beta1: float = 0.9, beta2: float = 0.999,
                 eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros(s) for s in shapes]
        self.v = [np.zeros(s) for s in shapes]

    def step(self, params, grads):
        self.t += 1
        b1c = 1.0 - self.beta1 ** self.t
        b2c = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / b1c) / (np.sqrt(v / b2c) + self.eps)


def _flat_params(net: DenseNetwork):
    params = []
    for layer in net.layers:
        params.append(layer.weights)
        params.append(layer.bias)
    return params


def train(net: DenseNetwork, train_data, eval_data, cfg: TrainConfig):
    """Train a copy of ``net`` on (X, y) pairs, returning (trained_net, history).

    The learning rate is multiplied by ``lr_decay_factor`` every
    ``lr_decay_every`` epochs.  Training stops once the evaluation loss has
    not improved for ``early_stop_patience`` epochs, and the returned
    network carries the weights of the best evaluation epoch.  The input
    network is left untouched.
    """
    X_train = _as_matrix(train_data[0])
    y_train = np.asarray(train_data[1], dtype=np.float64).reshape(-1)
    X_eval = _as_matrix(eval_data[0])
    y_eval = np.asarray(eval_data[1], dtype=np.float64).reshape(-1)
    if X_train.shape[0] != y_train.shape[0] or X_eval.shape[0] != y_eval.shape[0]:
        raise ValueError("feature/target lengths differ")
    if net.layers[-1].activation != IDENTITY:
        raise ValueError("regression training expects an identity final layer")

    net = net.copy()
    params = _flat_params(net)
    opt = _Adam([p.shape for p in params], cfg.initial_lr)
    seed = list(cfg.seed) if isinstance(cfg.seed, (tuple, list)) else [cfg.seed]
    rng = np.random.default_rng(seed + [0x7261])
    n = X_train.shape[0]
    history = TrainHistory()
    best_eval = np.inf
    best_weights = [p.copy() for p in params]
    epochs_since_best = 0

    for epoch in range(cfg.max_epochs):
        opt.lr = cfg.initial_lr * cfg.lr_decay_factor ** (epoch // cfg.lr_decay_every)
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            Xb, yb = X_train[idx], y_train[idx]
            dropout_rng = rng if net.dropout_rate > 0.0 else None
            trace = _run_forward(net, Xb, dropout_rng)
            preds = trace.outputs[:, 0]
            d_out = (2.0 / Xb.shape[0]) * (preds - yb)[:, None]
            _, grads = _backprop(net, Xb, trace, d_out)
            flat_grads = [g for pair in grads for g in pair]
            opt.step(params, flat_grads)

        train_loss = mse(forward(net, X_train)[0], y_train)
        eval_loss = mse(forward(net, X_eval)[0], y_eval)
        if not (np.isfinite(train_loss) and np.isfinite(eval_loss)):
            raise TrainingDivergedError(
                f"non-finite loss at epoch {epoch}: train={train_loss}, eval={eval_loss}"
            )
        history.train_loss.append(train_loss)
        history.eval_loss.append(eval_loss)
        history.learning_rate.append(opt.lr)

        if eval_loss < best_eval:
            best_eval = eval_loss
            best_weights = [p.copy() for p in params]
            history.best_epoch = epoch
            epochs_since_best = 0
        else:
            epochs_since_best += 1
            if epochs_since_best >= cfg.early_stop_patience:
                break

    history.stopped_epoch = len(history.train_loss) - 1
    for p, best in zip(params, best_weights):
        p[...] = best
    return net, history
