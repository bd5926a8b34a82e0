"""Uniform access to every attribution method by string id.

Studies pick methods by id; the registry wires up baselines and
backgrounds from the encoded training data and derives a per-method seed
stream so methods sharing one config stay decorrelated.
"""

from __future__ import annotations

import zlib
from dataclasses import replace
from functools import partial

import numpy as np

from ..network import DenseNetwork, predict
from .base import AttributionMatrix, Baseline, MethodConfig
from .deeplift import deeplift, deepshap
from .gradients import grad, grad_x_input, saliency, smoothgrad, smoothgrad_x_input
from .lrp import lrp
from .pathwise import expected_gradients, integrated_gradients
from .shapley import sampling_shap

STOCHASTIC_METHODS = frozenset({
    "smoothgrad", "smoothgrad_x_input", "expgrad",
    "deepshap_rescale", "deepshap_revealcancel", "sampling_shap",
})

ALL_METHODS = (
    "grad", "smoothgrad", "saliency",
    "grad_x_input", "smoothgrad_x_input",
    "lrp_zero", "lrp_epsilon", "lrp_alphabeta",
    "deeplift_rescale_zeros", "deeplift_rescale_means",
    "deeplift_revealcancel_zeros", "deeplift_revealcancel_means",
    "intgrad_zeros", "intgrad_means",
    "expgrad", "deepshap_rescale", "deepshap_revealcancel",
    "sampling_shap",
)


def method_seed(cfg: MethodConfig, method_id: str) -> MethodConfig:
    base = list(cfg.seed) if isinstance(cfg.seed, (tuple, list)) else [cfg.seed]
    return replace(cfg, seed=tuple(base + [zlib.crc32(method_id.encode())]))


def run_method(method_id: str, net: DenseNetwork, X, train_encoded,
               cfg: MethodConfig | None = None) -> AttributionMatrix:
    """Run one method on encoded inputs.

    ``train_encoded`` supplies the feature-means baseline and the
    background sample for the multi-reference methods.
    """
    cfg = method_seed(cfg or MethodConfig(), method_id)
    attr = _dispatch(method_id, net, X, train_encoded, cfg)
    if method_id in STOCHASTIC_METHODS:
        attr.params.setdefault("seed", list(cfg.seed))
    return attr


def _dispatch(method_id: str, net: DenseNetwork, X, train_encoded,
              cfg: MethodConfig) -> AttributionMatrix:
    X = np.asarray(X, dtype=np.float64)
    train_encoded = np.asarray(train_encoded, dtype=np.float64)
    means = Baseline.feature_means(train_encoded)

    if method_id == "grad":
        return grad(net, X)
    if method_id == "saliency":
        return saliency(net, X)
    if method_id == "smoothgrad":
        return smoothgrad(net, X, cfg)
    if method_id == "grad_x_input":
        return grad_x_input(net, X)
    if method_id == "smoothgrad_x_input":
        return smoothgrad_x_input(net, X, cfg)
    if method_id == "lrp_zero":
        return lrp(net, X, "zero")
    if method_id == "lrp_epsilon":
        return lrp(net, X, "epsilon", epsilon=cfg.lrp_epsilon)
    if method_id == "lrp_alphabeta":
        return lrp(net, X, "alpha_beta", alpha=cfg.lrp_alpha)
    if method_id == "deeplift_rescale_zeros":
        return deeplift(net, X, "rescale", Baseline.zeros())
    if method_id == "deeplift_rescale_means":
        return deeplift(net, X, "rescale", means)
    if method_id == "deeplift_revealcancel_zeros":
        return deeplift(net, X, "reveal_cancel", Baseline.zeros())
    if method_id == "deeplift_revealcancel_means":
        return deeplift(net, X, "reveal_cancel", means)
    if method_id == "intgrad_zeros":
        return integrated_gradients(net, X, Baseline.zeros(), steps=cfg.intgrad_steps)
    if method_id == "intgrad_means":
        return integrated_gradients(net, X, means, steps=cfg.intgrad_steps)
    if method_id == "expgrad":
        return expected_gradients(net, X, train_encoded, cfg)
    if method_id == "deepshap_rescale":
        return deepshap(net, X, "rescale", train_encoded, cfg)
    if method_id == "deepshap_revealcancel":
        return deepshap(net, X, "reveal_cancel", train_encoded, cfg)
    if method_id == "sampling_shap":
        return sampling_shap(partial(predict, net), X, train_encoded, cfg)
    raise ValueError(f"unknown method id {method_id!r}")
