"""Shared types for attribution methods: baselines, hyperparameters, and
the relevance-matrix container with its intercept bookkeeping."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..network import DenseNetwork, predict


@dataclass
class MethodConfig:
    """Hyperparameters shared across the attribution methods.

    ``sg_noise`` is relative to the per-feature value range of the
    explained batch.  The alpha/beta rule derives beta as 1 - alpha.
    """

    sg_samples: int = 50
    sg_noise: float = 0.2
    intgrad_steps: int = 50
    mc_samples: int = 50
    lrp_epsilon: float = 0.01
    lrp_alpha: float = 2.0
    seed: int | tuple = 0

    def __post_init__(self):
        if self.sg_noise < 0:
            raise ValueError("sg_noise must be non-negative")
        for name in ("sg_samples", "intgrad_steps", "mc_samples"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")

    def rng(self, *extra) -> np.random.Generator:
        seed = list(self.seed) if isinstance(self.seed, (tuple, list)) else [self.seed]
        return np.random.default_rng(seed + [int(e) for e in extra])


class Baseline:
    """Reference input against which an instance's effect is measured."""

    ZEROS = "zeros"
    FEATURE_MEANS = "feature_means"
    FIXED = "fixed"
    SAMPLE_SET = "sample_set"

    def __init__(self, kind: str, data: np.ndarray | None = None):
        self.kind = kind
        self.data = None if data is None else np.asarray(data, dtype=np.float64)

    @classmethod
    def zeros(cls) -> "Baseline":
        return cls(cls.ZEROS)

    @classmethod
    def feature_means(cls, train_encoded) -> "Baseline":
        train_encoded = np.asarray(train_encoded, dtype=np.float64)
        return cls(cls.FEATURE_MEANS, train_encoded.mean(axis=0))

    @classmethod
    def fixed(cls, vector) -> "Baseline":
        return cls(cls.FIXED, np.asarray(vector, dtype=np.float64).reshape(-1))

    @classmethod
    def sample_set(cls, rows) -> "Baseline":
        rows = np.asarray(rows, dtype=np.float64)
        if rows.ndim != 2 or rows.shape[0] == 0:
            raise ValueError("sample_set needs a non-empty matrix of rows")
        return cls(cls.SAMPLE_SET, rows)

    def vector(self, width: int) -> np.ndarray:
        """Resolve a single reference vector of the given width."""
        if self.kind == self.ZEROS:
            return np.zeros(width)
        if self.kind == self.SAMPLE_SET:
            raise ValueError("sample_set baselines must go through a multi-reference method")
        if self.data.shape != (width,):
            raise ValueError(f"baseline width {self.data.shape} does not match input {width}")
        return self.data

    def describe(self) -> dict:
        d = {"kind": self.kind}
        if self.kind == self.SAMPLE_SET:
            d["rows"] = int(self.data.shape[0])
        elif self.data is not None:
            d["vector"] = [float(v) for v in self.data]
        return d


@dataclass
class AttributionMatrix:
    """Per-instance, per-column relevance scores of one method.

    ``intercept`` is the explained output minus the row sum, i.e. the part
    of the prediction the method did not distribute over the inputs.
    """

    values: np.ndarray
    method: str
    params: dict = field(default_factory=dict)
    baseline: dict | None = None
    intercept: np.ndarray | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if not np.all(np.isfinite(self.values)):
            raise ValueError(f"{self.method}: non-finite relevance values")

    @property
    def n(self) -> int:
        return self.values.shape[0]


def make_attribution(net_or_predictions, X, values, method: str,
                     params: dict | None = None,
                     baseline: Baseline | dict | None = None) -> AttributionMatrix:
    """Assemble an AttributionMatrix, computing the intercept bookkeeping."""
    if isinstance(net_or_predictions, DenseNetwork):
        preds = predict(net_or_predictions, X)
    else:
        preds = np.asarray(net_or_predictions, dtype=np.float64).reshape(-1)
    values = np.asarray(values, dtype=np.float64)
    if isinstance(baseline, Baseline):
        baseline = baseline.describe()
    return AttributionMatrix(
        values=values,
        method=method,
        params=dict(params or {}),
        baseline=baseline,
        intercept=preds - values.sum(axis=1),
    )
