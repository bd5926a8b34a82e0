"""Plain-gradient methods and their input-weighted variants."""

from __future__ import annotations

import numpy as np

from ..network import DenseNetwork, _as_matrix, input_gradients
from .base import AttributionMatrix, MethodConfig, make_attribution


def grad(net: DenseNetwork, X) -> AttributionMatrix:
    """Feature-wise partial derivatives of the output at each instance."""
    X = _as_matrix(X)
    return make_attribution(net, X, input_gradients(net, X), "grad")


def saliency(net: DenseNetwork, X) -> AttributionMatrix:
    """Absolute gradients (the tabular reading of a saliency map)."""
    X = _as_matrix(X)
    return make_attribution(net, X, np.abs(input_gradients(net, X)), "saliency")


def _noise_scales(X: np.ndarray, sg_noise: float) -> np.ndarray:
    # noise level is relative to each feature's value range over the batch
    return sg_noise * (X.max(axis=0) - X.min(axis=0))


def _smoothed_gradients(net: DenseNetwork, X: np.ndarray, cfg: MethodConfig) -> np.ndarray:
    rng = cfg.rng(0x5347)
    scales = _noise_scales(X, cfg.sg_noise)
    total = np.zeros_like(X)
    for _ in range(cfg.sg_samples):
        noisy = X + rng.normal(0.0, 1.0, size=X.shape) * scales
        total += input_gradients(net, noisy)
    return total / cfg.sg_samples


def smoothgrad(net: DenseNetwork, X, cfg: MethodConfig) -> AttributionMatrix:
    """Average gradient over Gaussian-perturbed copies of each instance."""
    X = _as_matrix(X)
    values = _smoothed_gradients(net, X, cfg)
    return make_attribution(net, X, values, "smoothgrad",
                            params={"samples": cfg.sg_samples, "noise": cfg.sg_noise})


def grad_x_input(net: DenseNetwork, X) -> AttributionMatrix:
    """Hadamard product of gradient and input (implicit zero reference)."""
    X = _as_matrix(X)
    return make_attribution(net, X, input_gradients(net, X) * X, "grad_x_input")


def smoothgrad_x_input(net: DenseNetwork, X, cfg: MethodConfig) -> AttributionMatrix:
    """SmoothGrad gradients multiplied by the unperturbed inputs."""
    X = _as_matrix(X)
    values = _smoothed_gradients(net, X, cfg) * X
    return make_attribution(net, X, values, "smoothgrad_x_input",
                            params={"samples": cfg.sg_samples, "noise": cfg.sg_noise})
