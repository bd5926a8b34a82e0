"""Layer-wise relevance propagation for dense ReLU/identity networks.

Relevance starts at the raw output and is redistributed through each dense
layer; activations pass relevance through unchanged.  All 0/0 situations
contribute zero relevance, which keeps outputs finite on inactive units.
"""

from __future__ import annotations

import numpy as np

from ..network import DenseNetwork, _as_matrix, forward
from .base import AttributionMatrix, make_attribution

RULES = ("zero", "epsilon", "alpha_beta")


def _safe_ratio(R: np.ndarray, denom: np.ndarray) -> np.ndarray:
    mask = denom != 0.0
    return np.where(mask, R / np.where(mask, denom, 1.0), 0.0)


def lrp(net: DenseNetwork, X, rule: str = "zero", epsilon: float = 0.01,
        alpha: float = 2.0) -> AttributionMatrix:
    """Propagate the output back to the inputs under one of three rules.

    zero:       R_j = sum_k (a_j w_jk / z_k) R_k
    epsilon:    denominator z_k + eps * sign(z_k), absorbing relevance
    alpha_beta: positive and negative pre-activation parts weighted by
                alpha and beta = 1 - alpha, biases split alongside
    """
    if rule not in RULES:
        raise ValueError(f"unknown LRP rule {rule!r}")
    if net.output_dim != 1:
        raise ValueError("lrp expects a single-output network")
    X = _as_matrix(X)
    preds, trace = forward(net, X)
    R = preds[:, None]

    for i in range(len(net.layers) - 1, -1, -1):
        layer = net.layers[i]
        a_in = X if i == 0 else trace.activations[i - 1]
        W = layer.weights
        if rule == "alpha_beta":
            a_pos, a_neg = np.maximum(a_in, 0.0), np.minimum(a_in, 0.0)
            W_pos, W_neg = np.maximum(W, 0.0), np.minimum(W, 0.0)
            b_pos, b_neg = np.maximum(layer.bias, 0.0), np.minimum(layer.bias, 0.0)
            z_pos = a_pos @ W_pos.T + a_neg @ W_neg.T + b_pos
            z_neg = a_pos @ W_neg.T + a_neg @ W_pos.T + b_neg
            S_pos = _safe_ratio(R, z_pos)
            S_neg = _safe_ratio(R, z_neg)
            R = (alpha * (a_pos * (S_pos @ W_pos) + a_neg * (S_pos @ W_neg))
                 - (alpha - 1.0) * (a_pos * (S_neg @ W_neg) + a_neg * (S_neg @ W_pos)))
        else:
            z = trace.pre_activations[i]
            denom = z if rule == "zero" else z + epsilon * np.sign(z)
            R = a_in * (_safe_ratio(R, denom) @ W)

    method = {"zero": "lrp_zero", "epsilon": "lrp_epsilon", "alpha_beta": "lrp_alphabeta"}[rule]
    params = {}
    if rule == "epsilon":
        params["epsilon"] = epsilon
    elif rule == "alpha_beta":
        params["alpha"] = alpha
        params["beta"] = 1.0 - alpha
    return make_attribution(preds, X, R, method, params=params,
                            baseline={"kind": "implicit_zeros"})
