"""Minimal dense feed-forward network engine.

Forward evaluation with per-layer traces, reverse-mode gradients with
respect to inputs and parameters, and seeded weight initialization.
Everything runs in double precision so that the numerical equivalences
between attribution methods hold at tight tolerances.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

RELU = "relu"
IDENTITY = "identity"
ACTIVATIONS = (RELU, IDENTITY)


class DimensionMismatchError(ValueError):
    """Input width or layer chain does not match the network."""


def _as_matrix(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2:
        raise DimensionMismatchError(f"expected 2-d input, got shape {X.shape}")
    return X


def activate(z: np.ndarray, kind: str) -> np.ndarray:
    if kind == RELU:
        return np.maximum(z, 0.0)
    if kind == IDENTITY:
        return z
    raise ValueError(f"unknown activation {kind!r}")


def activation_gate(z: np.ndarray, kind: str) -> np.ndarray:
    """Derivative of the activation; the subgradient at a ReLU kink is 0."""
    if kind == RELU:
        return (z > 0.0).astype(np.float64)
    if kind == IDENTITY:
        return np.ones_like(z)
    raise ValueError(f"unknown activation {kind!r}")


@dataclass
class DenseLayer:
    """One dense layer: ``a = activation(W x + b)`` with W of shape (out, in)."""

    weights: np.ndarray
    bias: np.ndarray
    activation: str = RELU

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.weights.ndim != 2:
            raise DimensionMismatchError("weights must be a 2-d matrix")
        if self.bias.ndim != 1 or self.bias.shape[0] != self.weights.shape[0]:
            raise DimensionMismatchError(
                f"bias length {self.bias.shape} does not match weight rows "
                f"{self.weights.shape[0]}"
            )
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]

    def copy(self) -> "DenseLayer":
        return DenseLayer(self.weights.copy(), self.bias.copy(), self.activation)


@dataclass
class DenseNetwork:
    """An ordered stack of dense layers with optional inverted dropout.

    Dropout (if any) acts after each hidden activation and only in
    training mode; inference is fully deterministic.  The final layer of
    a regression network uses the identity activation.
    """

    layers: list[DenseLayer]
    dropout_rate: float = 0.0

    def __post_init__(self):
        if not self.layers:
            raise ValueError("network needs at least one layer")
        if not (0.0 <= self.dropout_rate < 1.0):
            raise ValueError("dropout_rate must lie in [0, 1)")
        for prev, nxt in zip(self.layers, self.layers[1:]):
            if prev.out_dim != nxt.in_dim:
                raise DimensionMismatchError(
                    f"layer chain broken: {prev.out_dim} -> {nxt.in_dim}"
                )

    @property
    def input_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def output_dim(self) -> int:
        return self.layers[-1].out_dim

    def copy(self) -> "DenseNetwork":
        return DenseNetwork([l.copy() for l in self.layers], self.dropout_rate)


@dataclass
class ForwardTrace:
    """Per-layer pre-activations and (consumed) post-activations for a batch.

    ``activations[l]`` is what layer ``l + 1`` consumed, i.e. including the
    dropout mask in training mode.  ``dropout_masks`` holds the applied
    ``mask / keep`` factors, or None in inference mode.
    """

    pre_activations: list[np.ndarray] = field(default_factory=list)
    activations: list[np.ndarray] = field(default_factory=list)
    outputs: np.ndarray | None = None
    dropout_masks: list[np.ndarray] | None = None

    def layer_count(self) -> int:
        return len(self.pre_activations)


def _run_forward(net: DenseNetwork, X: np.ndarray, rng: np.random.Generator | None) -> ForwardTrace:
    trace = ForwardTrace()
    training = rng is not None and net.dropout_rate > 0.0
    if training:
        trace.dropout_masks = []
    a = X
    last = len(net.layers) - 1
    for i, layer in enumerate(net.layers):
        z = a @ layer.weights.T + layer.bias
        a = activate(z, layer.activation)
        if training and i < last:
            keep = 1.0 - net.dropout_rate
            mask = (rng.random(z.shape) < keep).astype(np.float64) / keep
            a = a * mask
            trace.dropout_masks.append(mask)
        elif training:
            trace.dropout_masks.append(np.ones_like(z))
        trace.pre_activations.append(z)
        trace.activations.append(a)
    trace.outputs = a
    return trace


def forward(net: DenseNetwork, X, mode: str = "inference", seed: int | None = None):
    """Evaluate the network on a batch.

    mode "inference" ignores dropout; mode "training" applies inverted
    dropout driven by ``seed``.  Returns ``(predictions, trace)`` where
    predictions is a length-n vector for single-output networks and an
    (n, out_dim) matrix otherwise.
    """
    X = _as_matrix(X)
    if X.shape[1] != net.input_dim:
        raise DimensionMismatchError(
            f"input has {X.shape[1]} columns, network expects {net.input_dim}"
        )
    if mode == "inference":
        rng = None
    elif mode == "training":
        if seed is None:
            raise ValueError("training mode requires a seed")
        rng = np.random.default_rng(seed)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    trace = _run_forward(net, X, rng)
    preds = trace.outputs
    if net.output_dim == 1:
        preds = preds[:, 0]
    return preds, trace


def predict(net: DenseNetwork, X) -> np.ndarray:
    """Inference-mode predictions only (no trace)."""
    return forward(net, X)[0]


def _backprop(net: DenseNetwork, X: np.ndarray, trace: ForwardTrace, d_out: np.ndarray):
    """Shared reverse pass.

    ``d_out`` is the derivative of the objective with respect to the raw
    network outputs, shape (n, out_dim).  Returns ``(d_input, param_grads)``
    with one ``(dW, db)`` pair per layer.
    """
    param_grads: list[tuple[np.ndarray, np.ndarray]] = [None] * len(net.layers)
    da = d_out
    for i in range(len(net.layers) - 1, -1, -1):
        layer = net.layers[i]
        if trace.dropout_masks is not None:
            da = da * trace.dropout_masks[i]
        dz = da * activation_gate(trace.pre_activations[i], layer.activation)
        a_in = X if i == 0 else trace.activations[i - 1]
        param_grads[i] = (dz.T @ a_in, dz.sum(axis=0))
        da = dz @ layer.weights
    return da, param_grads


def input_gradients(net: DenseNetwork, X) -> np.ndarray:
    """Per-instance gradient of the scalar output with respect to the input.

    Entry (i, j) is d f(x_i) / d x_ij, accumulated in reverse mode on the
    inference-mode trace.
    """
    X = _as_matrix(X)
    if net.output_dim != 1:
        raise DimensionMismatchError("input_gradients expects a single-output network")
    _, trace = forward(net, X)
    d_out = np.ones((X.shape[0], 1))
    d_input, _ = _backprop(net, X, trace, d_out)
    return d_input


def parameter_gradients(net: DenseNetwork, X, y) -> list[tuple[np.ndarray, np.ndarray]]:
    """Gradients of the batch mean-squared error for every layer.

    Returns one ``(dW, db)`` pair per layer, for the inference-mode
    (dropout-free) forward pass.
    """
    X = _as_matrix(X)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if y.shape[0] != X.shape[0]:
        raise DimensionMismatchError("y length does not match batch size")
    preds, trace = forward(net, X)
    d_out = (2.0 / X.shape[0]) * (preds - y)[:, None]
    _, grads = _backprop(net, X, trace, d_out)
    return grads


def mse(predictions: np.ndarray, targets: np.ndarray) -> float:
    predictions = np.asarray(predictions, dtype=np.float64).reshape(-1)
    targets = np.asarray(targets, dtype=np.float64).reshape(-1)
    return float(np.mean((predictions - targets) ** 2))


def kaiming_uniform_init(layer_dims: list[int], seed, dropout_rate: float = 0.0,
                         final_activation: str = IDENTITY) -> DenseNetwork:
    """Build a ReLU network with fan-in-scaled uniform weights and zero biases.

    ``layer_dims`` runs from input width to output width, e.g.
    ``[12, 256, 128, 64, 1]``.  The last layer gets ``final_activation``.
    """
    if len(layer_dims) < 2:
        raise ValueError("need at least input and output dims")
    rng = np.random.default_rng(seed)
    layers = []
    for i, (fan_in, fan_out) in enumerate(zip(layer_dims, layer_dims[1:])):
        bound = np.sqrt(6.0 / fan_in)
        W = rng.uniform(-bound, bound, size=(fan_out, fan_in))
        b = np.zeros(fan_out)
        act = final_activation if i == len(layer_dims) - 2 else RELU
        layers.append(DenseLayer(W, b, act))
    return DenseNetwork(layers, dropout_rate)
