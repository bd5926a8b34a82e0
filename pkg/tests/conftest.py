"""Shared helpers: random network factories and finite-difference oracles.

The oracles only use forward evaluation, so they stay independent of the
reverse-mode code paths they check.
"""

import numpy as np
import pytest

from attrsim.network import DenseLayer, DenseNetwork, predict


def random_net(rng, dims, zero_bias=False, dropout_rate=0.0):
    """Random ReLU net with identity output; weights scaled by fan-in."""
    layers = []
    for i, (fan_in, fan_out) in enumerate(zip(dims, dims[1:])):
        W = rng.normal(0.0, 1.0 / np.sqrt(fan_in), size=(fan_out, fan_in))
        b = np.zeros(fan_out) if zero_bias else rng.normal(0.0, 0.3, size=fan_out)
        act = "identity" if i == len(dims) - 2 else "relu"
        layers.append(DenseLayer(W, b, act))
    return DenseNetwork(layers, dropout_rate)


def random_dims(rng, max_hidden_layers=3, max_width=16, in_dim=None):
    n_hidden = int(rng.integers(1, max_hidden_layers + 1))
    dims = [in_dim or int(rng.integers(2, 9))]
    dims += [int(rng.integers(2, max_width + 1)) for _ in range(n_hidden)]
    return dims + [1]


def fd_input_gradients(net, X, h=1e-5):
    """Central finite differences of the output w.r.t. each input entry."""
    X = np.asarray(X, dtype=np.float64)
    out = np.zeros_like(X)
    for i in range(X.shape[0]):
        for j in range(X.shape[1]):
            xp, xm = X.copy(), X.copy()
            xp[i, j] += h
            xm[i, j] -= h
            out[i, j] = (predict(net, xp)[i] - predict(net, xm)[i]) / (2 * h)
    return out


def fd_parameter_gradients(net, X, y, h=1e-5):
    """Central finite differences of the batch MSE w.r.t. every parameter."""
    y = np.asarray(y, dtype=np.float64).reshape(-1)

    def loss(n):
        return np.mean((predict(n, X) - y) ** 2)

    grads = []
    for li, layer in enumerate(net.layers):
        dW = np.zeros_like(layer.weights)
        for idx in np.ndindex(*layer.weights.shape):
            up, down = net.copy(), net.copy()
            up.layers[li].weights[idx] += h
            down.layers[li].weights[idx] -= h
            dW[idx] = (loss(up) - loss(down)) / (2 * h)
        db = np.zeros_like(layer.bias)
        for idx in np.ndindex(*layer.bias.shape):
            up, down = net.copy(), net.copy()
            up.layers[li].bias[idx] += h
            down.layers[li].bias[idx] -= h
            db[idx] = (loss(up) - loss(down)) / (2 * h)
        grads.append((dW, db))
    return grads


def max_rel_error(got, want, floor=1.0):
    """Max |got - want| / max(floor, |want|) over all entries."""
    got = np.asarray(got, dtype=np.float64)
    want = np.asarray(want, dtype=np.float64)
    return float(np.max(np.abs(got - want) / np.maximum(floor, np.abs(want))))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
