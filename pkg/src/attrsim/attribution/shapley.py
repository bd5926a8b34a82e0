"""Model-agnostic Shapley value estimation by permutation sampling.

Each iteration draws a feature permutation and one background row, then
walks the permutation replacing background values by the explained
instance's values, crediting each feature with its marginal prediction
change.  Permutations come in antithetic pairs (a permutation and its
reverse) to cut variance; the estimator is unbiased for the
marginal-baseline Shapley value.
"""

from __future__ import annotations

import numpy as np

from .base import AttributionMatrix, Baseline, MethodConfig


def sampling_shap(predict_fn, X, background, cfg: MethodConfig | None = None,
                  return_se: bool = False):
    """Estimate Shapley values for every row of X.

    ``predict_fn`` maps an (m, p) matrix to an m-vector, which is the only
    model access required.  With ``return_se`` the per-feature Monte-Carlo
    standard error (over antithetic pairs) is returned alongside.
    """
    cfg = cfg or MethodConfig()
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    background = np.asarray(background, dtype=np.float64)
    if background.ndim != 2 or background.shape[0] == 0:
        raise ValueError("background must be a non-empty matrix")
    n, p = X.shape
    mc = cfg.mc_samples
    rng = cfg.rng(0x5353)

    perms = []
    while len(perms) < mc:
        fwd = rng.permutation(p)
        perms.append(fwd)
        if len(perms) < mc:
            perms.append(fwd[::-1])
    bg_rows = rng.integers(background.shape[0], size=mc)

    contrib = np.empty((mc, n, p))
    states = np.empty((p + 1, n, p))
    for w, (perm, row) in enumerate(zip(perms, bg_rows)):
        states[0] = background[row]
        for s, feat in enumerate(perm):
            states[s + 1] = states[s]
            states[s + 1][:, feat] = X[:, feat]
        preds = predict_fn(states.reshape((p + 1) * n, p)).reshape(p + 1, n)
        deltas = np.diff(preds, axis=0)
        contrib[w][:, perm] = deltas.T
    values = contrib.mean(axis=0)

    attr = AttributionMatrix(
        values=values,
        method="sampling_shap",
        params={"mc_samples": mc},
        baseline={"kind": Baseline.SAMPLE_SET, "rows": int(background.shape[0])},
        intercept=np.asarray(predict_fn(X), dtype=np.float64) - values.sum(axis=1),
    )
    if not return_se:
        return attr

    n_pairs = (mc + 1) // 2
    pair_means = np.empty((n_pairs, n, p))
    for k in range(n_pairs):
        hi = min(2 * k + 2, mc)
        pair_means[k] = contrib[2 * k:hi].mean(axis=0)
    if n_pairs > 1:
        se = pair_means.std(axis=0, ddof=1) / np.sqrt(n_pairs)
    else:
        se = np.zeros((n, p))
    return attr, se
