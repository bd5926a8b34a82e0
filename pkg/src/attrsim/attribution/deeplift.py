"""Difference-from-reference backpropagation (rescale and reveal-cancel
rules) plus its multi-reference averaging variant.

Both rules decompose f(x) - f(ref) exactly: multipliers m satisfy
m * delta == delta_output layer by layer, so the relevance row sums match
the output difference up to float rounding (and the documented near-zero
gradient guard of the rescale rule).
"""

from __future__ import annotations

import numpy as np

from ..network import (IDENTITY, RELU, DenseNetwork, _as_matrix, activate,
                       activation_gate, forward)
from .base import AttributionMatrix, Baseline, MethodConfig, make_attribution

RULES = ("rescale", "reveal_cancel")
_NEAR_ZERO = 1e-7


def _rescale_values(net: DenseNetwork, X: np.ndarray, ref: np.ndarray) -> np.ndarray:
    _, trace_x = forward(net, X)
    _, trace_r = forward(net, ref[None, :])

    # multiplier on the final post-activation output
    m = np.ones((X.shape[0], 1))
    for i in range(len(net.layers) - 1, -1, -1):
        layer = net.layers[i]
        dz = trace_x.pre_activations[i] - trace_r.pre_activations[i]
        if layer.activation == IDENTITY:
            m_z = m
        else:
            da = activate(trace_x.pre_activations[i], RELU) - activate(
                trace_r.pre_activations[i], RELU)
            near = np.abs(dz) < _NEAR_ZERO
            slope = np.where(near,
                             activation_gate(trace_x.pre_activations[i], RELU),
                             da / np.where(near, 1.0, dz))
            m_z = m * slope
        m = m_z @ layer.weights
    return m * (X - ref)


def _reveal_cancel_values(net: DenseNetwork, X: np.ndarray, ref: np.ndarray) -> np.ndarray:
    _, trace_r = forward(net, ref[None, :])
    dx = X - ref
    d_pos, d_neg = np.maximum(dx, 0.0), np.minimum(dx, 0.0)

    # forward pass tracking positive/negative delta contributions per layer
    dz_pos_l, dz_neg_l, da_pos_l, da_neg_l = [], [], [], []
    for i, layer in enumerate(net.layers):
        W_pos = np.maximum(layer.weights, 0.0)
        W_neg = np.minimum(layer.weights, 0.0)
        dz_pos = d_pos @ W_pos.T + d_neg @ W_neg.T
        dz_neg = d_pos @ W_neg.T + d_neg @ W_pos.T
        z_ref = trace_r.pre_activations[i]
        if layer.activation == IDENTITY:
            da_pos, da_neg = dz_pos, dz_neg
        else:
            relu = lambda v: np.maximum(v, 0.0)
            da_pos = 0.5 * ((relu(z_ref + dz_pos) - relu(z_ref))
                            + (relu(z_ref + dz_pos + dz_neg) - relu(z_ref + dz_neg)))
            da_neg = 0.5 * ((relu(z_ref + dz_neg) - relu(z_ref))
                            + (relu(z_ref + dz_neg + dz_pos) - relu(z_ref + dz_pos)))
        dz_pos_l.append(dz_pos)
        dz_neg_l.append(dz_neg)
        da_pos_l.append(da_pos)
        da_neg_l.append(da_neg)
        d_pos, d_neg = da_pos, da_neg

    # backward multipliers for the positive and negative delta parts
    m_pos = np.ones((X.shape[0], 1))
    m_neg = np.ones((X.shape[0], 1))
    for i in range(len(net.layers) - 1, -1, -1):
        layer = net.layers[i]
        zp, zn = dz_pos_l[i], dz_neg_l[i]
        mask_p, mask_n = zp != 0.0, zn != 0.0
        mz_pos = m_pos * np.where(mask_p, da_pos_l[i] / np.where(mask_p, zp, 1.0), 0.0)
        mz_neg = m_neg * np.where(mask_n, da_neg_l[i] / np.where(mask_n, zn, 1.0), 0.0)
        W_pos = np.maximum(layer.weights, 0.0)
        W_neg = np.minimum(layer.weights, 0.0)
        m_pos = mz_pos @ W_pos + mz_neg @ W_neg
        m_neg = mz_neg @ W_pos + mz_pos @ W_neg
    dx = X - ref
    return m_pos * np.maximum(dx, 0.0) + m_neg * np.minimum(dx, 0.0)


def _values_for_rule(net: DenseNetwork, X: np.ndarray, ref: np.ndarray, rule: str) -> np.ndarray:
    if rule == "rescale":
        return _rescale_values(net, X, ref)
    return _reveal_cancel_values(net, X, ref)


def deeplift(net: DenseNetwork, X, rule: str = "rescale",
             baseline: Baseline | None = None) -> AttributionMatrix:
    """Decompose f(x) - f(baseline) over the input columns.

    Accepts a single reference (zeros, feature means, or a fixed vector);
    sample sets belong to :func:`deepshap`.
    """
    if rule not in RULES:
        raise ValueError(f"unknown DeepLIFT rule {rule!r}")
    if net.output_dim != 1:
        raise ValueError("deeplift expects a single-output network")
    X = _as_matrix(X)
    baseline = baseline or Baseline.zeros()
    if baseline.kind == Baseline.SAMPLE_SET:
        raise ValueError("sample_set baselines are handled by deepshap")
    ref = baseline.vector(X.shape[1])
    values = _values_for_rule(net, X, ref, rule)
    return make_attribution(net, X, values, f"deeplift_{rule}",
                            params={"rule": rule}, baseline=baseline)


def deepshap(net: DenseNetwork, X, rule: str = "rescale", background=None,
             cfg: MethodConfig | None = None) -> AttributionMatrix:
    """Average DeepLIFT attributions over references drawn from a background
    sample (without replacement when the budget allows).

    The row sums then match f(x) minus the mean prediction over the drawn
    references.
    """
    if rule not in RULES:
        raise ValueError(f"unknown DeepLIFT rule {rule!r}")
    cfg = cfg or MethodConfig()
    background = np.asarray(background, dtype=np.float64)
    if background.ndim != 2 or background.shape[0] == 0:
        raise ValueError("background must be a non-empty matrix")
    X = _as_matrix(X)
    rng = cfg.rng(0x4453)
    m = background.shape[0]
    if cfg.mc_samples <= m:
        idx = rng.choice(m, size=cfg.mc_samples, replace=False)
    else:
        idx = rng.integers(m, size=cfg.mc_samples)
    total = np.zeros_like(X)
    for i in idx:
        total += _values_for_rule(net, X, background[i], rule)
    values = total / len(idx)
    return make_attribution(net, X, values, f"deepshap_{rule}",
                            params={"rule": rule, "mc_samples": cfg.mc_samples},
                            baseline={"kind": Baseline.SAMPLE_SET, "rows": int(m),
                                      "drawn": int(len(idx))})
