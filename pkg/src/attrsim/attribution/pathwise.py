"""Path-integral attribution: integrated gradients along a straight path to
a single reference, and its sample-based multi-reference estimator."""

from __future__ import annotations

import numpy as np

from ..network import DenseNetwork, _as_matrix, input_gradients
from .base import AttributionMatrix, Baseline, MethodConfig, make_attribution


def integrated_gradients(net: DenseNetwork, X, baseline: Baseline | None = None,
                         steps: int = 50) -> AttributionMatrix:
    """Trapezoidal approximation of the path integral of the gradients.

    r_j = (x_j - ref_j) * integral of df/dx_j along ref + t (x - ref); the
    row sums approach f(x) - f(ref) as the step count grows.
    """
    if steps < 1:
        raise ValueError("steps must be at least 1")
    X = _as_matrix(X)
    baseline = baseline or Baseline.zeros()
    ref = baseline.vector(X.shape[1])
    diff = X - ref
    weights = np.full(steps + 1, 1.0 / steps)
    weights[0] = weights[-1] = 0.5 / steps
    total = np.zeros_like(X)
    for t, w in enumerate(weights):
        point = ref + (t / steps) * diff
        total += w * input_gradients(net, point)
    return make_attribution(net, X, diff * total, "intgrad",
                            params={"steps": steps}, baseline=baseline)


def expected_gradients(net: DenseNetwork, X, background,
                       cfg: MethodConfig | None = None) -> AttributionMatrix:
    """Monte-Carlo path attribution with references drawn from a background
    sample and a uniform path position per draw."""
    cfg = cfg or MethodConfig()
    background = np.asarray(background, dtype=np.float64)
    if background.ndim != 2 or background.shape[0] == 0:
        raise ValueError("background must be a non-empty matrix")
    X = _as_matrix(X)
    rng = cfg.rng(0x4547)
    total = np.zeros_like(X)
    for _ in range(cfg.mc_samples):
        ref = background[rng.integers(background.shape[0])]
        alpha = rng.random()
        diff = X - ref
        total += diff * input_gradients(net, ref + alpha * diff)
    values = total / cfg.mc_samples
    return make_attribution(net, X, values, "expgrad",
                            params={"mc_samples": cfg.mc_samples},
                            baseline={"kind": Baseline.SAMPLE_SET,
                                      "rows": int(background.shape[0])})
