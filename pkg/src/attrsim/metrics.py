"""Comparison metrics: ground-truth correlation, rank-based disagreement
measures, top-k importance detection, and mean/SD aggregation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import kendalltau

from .dgp import DatasetBundle


def pearson_flagged(a, b) -> tuple[float, bool]:
    """Pearson r plus a degenerate flag.

    A zero-variance side carries no ordering information, so the
    correlation is reported as 0 with the flag set.
    """
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    if a.shape != b.shape:
        raise ValueError("vectors must have equal length")
    if a.size < 2:
        raise ValueError("need at least 2 observations")
    a0 = a - a.mean()
    b0 = b - b.mean()
    denom = np.sqrt((a0 @ a0) * (b0 @ b0))
    if denom == 0.0:
        return 0.0, True
    return float(np.clip((a0 @ b0) / denom, -1.0, 1.0)), False


def pearson(a, b) -> float:
    return pearson_flagged(a, b)[0]


def ground_truth_correlation(attr_values, bundle: DatasetBundle):
    """Per-feature Pearson correlation between attributions (already
    aggregated to original features) and the ground-truth effect columns.

    Returns (correlations, degenerate_flags), each of length p.
    """
    bundle.require_ground_truth()
    values = getattr(attr_values, "values", attr_values)
    values = np.asarray(values, dtype=np.float64)
    if values.shape != bundle.effects.shape:
        raise ValueError(
            f"attribution shape {values.shape} does not match effects "
            f"{bundle.effects.shape}; aggregate encoded columns first"
        )
    rs = np.empty(bundle.p)
    flags = np.zeros(bundle.p, dtype=bool)
    for j in range(bundle.p):
        rs[j], flags[j] = pearson_flagged(values[:, j], bundle.effects[:, j])
    return rs, flags


def kendall_tau(a, b, absolute: bool = True) -> float:
    """Tie-corrected (tau-b) rank correlation between two relevance vectors.

    Methods are compared on relevance magnitude by default; pass
    ``absolute=False`` for signed values.  Degenerate inputs (all-tied)
    yield 0.
    """
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    if absolute:
        a, b = np.abs(a), np.abs(b)
    tau = kendalltau(a, b).statistic
    return float(tau) if np.isfinite(tau) else 0.0


def rank_order(values) -> np.ndarray:
    """Feature indices sorted by descending |relevance|, ties by index."""
    v = np.abs(np.asarray(values, dtype=np.float64).reshape(-1))
    return np.lexsort((np.arange(v.size), -v))


def rank_agreement(a, b, k: int) -> float:
    """Fraction of the top-k rank positions on which both vectors place the
    same feature."""
    if k < 1:
        raise ValueError("k must be positive")
    ra = rank_order(a)[:k]
    rb = rank_order(b)[:k]
    return float(np.mean(ra == rb))


def topk_f1(values, important_set, k: int) -> float:
    """F1 of the top-k-by-|relevance| prediction against the true set."""
    pred = set(rank_order(values)[:k].tolist())
    truth = set(int(i) for i in important_set)
    tp = len(pred & truth)
    if tp == 0:
        return 0.0
    precision = tp / len(pred)
    recall = tp / len(truth)
    return 2.0 * precision * recall / (precision + recall)


def method_correlation_matrix(named_values: list[tuple[str, np.ndarray]]):
    """Mean-over-features Pearson correlation between methods.

    ``named_values`` holds (label, n x p relevance matrix) pairs; returns
    (labels, symmetric matrix).  Degenerate feature pairs contribute 0.
    """
    labels = [name for name, _ in named_values]
    mats = [np.asarray(v, dtype=np.float64) for _, v in named_values]
    m = len(mats)
    out = np.eye(m)
    for i in range(m):
        for j in range(i, m):
            rs = [pearson(mats[i][:, f], mats[j][:, f]) for f in range(mats[i].shape[1])]
            out[i, j] = out[j, i] = float(np.mean(rs))
    return labels, out


@dataclass
class Aggregate:
    mean: float
    sd: float
    n: int
    n_degenerate: int = 0
    sd_flag: bool = False  # set when n < 2 and the SD is reported as 0


def aggregate(values, flags=None) -> Aggregate:
    """Flat mean and unbiased SD over repetitions x features."""
    v = np.asarray(values, dtype=np.float64).reshape(-1)
    if v.size == 0:
        raise ValueError("nothing to aggregate")
    n_degenerate = int(np.sum(flags)) if flags is not None else 0
    if v.size == 1:
        return Aggregate(float(v[0]), 0.0, 1, n_degenerate, sd_flag=True)
    return Aggregate(float(v.mean()), float(np.std(v, ddof=1)), int(v.size), n_degenerate)


def r_squared(predictions, targets) -> float:
    """Coefficient of determination, 1 - SS_res / SS_tot."""
    p = np.asarray(predictions, dtype=np.float64).reshape(-1)
    t = np.asarray(targets, dtype=np.float64).reshape(-1)
    if p.shape != t.shape:
        raise ValueError("prediction/target lengths differ")
    ss_res = float(np.sum((t - p) ** 2))
    ss_tot = float(np.sum((t - t.mean()) ** 2))
    if ss_tot == 0.0:
        return 0.0  # constant targets: no variance to explain
    return 1.0 - ss_res / ss_tot
