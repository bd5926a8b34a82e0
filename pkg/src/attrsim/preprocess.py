"""Fit-on-train scaling and categorical encoding with a reverse column map.

Scaler parameters are always estimated on training data only and then
applied everywhere.  Encoders expand a categorical feature into one or
more columns; the pipeline's column map records which encoded columns
belong to which original feature so relevance scores can be summed back
to one value per feature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dgp import DatasetBundle, FeatureSpec

SCALER_KINDS = ("none", "z_score", "max_abs")
ENCODER_KINDS = ("label", "one_hot", "dummy", "binary")

SCALED_FEATURE_KINDS = ("continuous", "uniform")
ENCODED_FEATURE_KINDS = ("categorical", "bernoulli")


class ConstantColumnError(ValueError):
    """A scaler cannot be fitted on a constant training column."""


class UnseenLevelError(ValueError):
    """A categorical value outside the fitted level table."""


def binary_width(c: int) -> int:
    """Number of binary-encoding columns: floor(log(C)/log(2) + 1)."""
    return int(math.floor(math.log2(c) + 1.0))


@dataclass
class FeatureTransform:
    """Fitted transform of one original feature."""

    mode: str                 # "scaler" or "encoder"
    kind: str
    mean: float = 0.0
    sd: float = 1.0
    max_abs: float = 1.0
    levels: list[float] = field(default_factory=list)

    @property
    def width(self) -> int:
        if self.mode == "scaler":
            return 1
        c = len(self.levels)
        if self.kind == "label":
            return 1
        if self.kind == "one_hot":
            return c
        if self.kind == "dummy":
            return c - 1
        return binary_width(c)

    def to_dict(self) -> dict:
        d = {"mode": self.mode, "kind": self.kind}
        if self.mode == "scaler":
            if self.kind == "z_score":
                d.update(mean=self.mean, sd=self.sd)
            elif self.kind == "max_abs":
                d.update(max_abs=self.max_abs)
        else:
            d["levels"] = list(self.levels)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureTransform":
        return cls(**d)


@dataclass
class PreprocessPipeline:
    transforms: list[FeatureTransform]

    @property
    def n_features(self) -> int:
        return len(self.transforms)

    @property
    def n_encoded(self) -> int:
        return sum(t.width for t in self.transforms)

    @property
    def column_map(self) -> list[list[int]]:
        """Original feature index -> list of encoded column indices."""
        cmap, start = [], 0
        for t in self.transforms:
            cmap.append(list(range(start, start + t.width)))
            start += t.width
        return cmap

    def to_dict(self) -> dict:
        return {"features": [t.to_dict() for t in self.transforms],
                "column_map": self.column_map}

    @classmethod
    def from_dict(cls, d: dict) -> "PreprocessPipeline":
        return cls([FeatureTransform.from_dict(t) for t in d["features"]])


def standard_kinds(schema: list[FeatureSpec], scaler: str = "z_score",
                   binary_encoding: str = "label",
                   categorical_encoding: str = "one_hot") -> list[str]:
    """Per-feature transform choices following the common convention:
    one scaler for all continuous features, one encoding for binary
    (2-level) features and one for the remaining categoricals."""
    kinds = []
    for f in schema:
        if f.kind in SCALED_FEATURE_KINDS:
            kinds.append(scaler)
        elif f.kind == "bernoulli" or (f.kind == "categorical" and f.levels == 2):
            kinds.append(binary_encoding)
        else:
            kinds.append(categorical_encoding)
    return kinds


def _level_table(spec: FeatureSpec) -> list[float]:
    if spec.kind == "categorical":
        return [float(k) for k in range(1, spec.levels + 1)]
    return [0.0, 1.0]  # bernoulli


def fit(kinds: list[str], train: DatasetBundle) -> PreprocessPipeline:
    """Fit per-feature transforms on training data.

    Scalers (for continuous features) estimate their parameters from the
    training column; the z-score standard deviation uses the unbiased n-1
    estimator.  Encoder level tables come from the feature schema, so the
    code assignment does not depend on which levels the training sample
    happened to contain.
    """
    if train.n == 0:
        raise ValueError("training data is empty")
    if len(kinds) != train.p:
        raise ValueError("one transform kind per feature required")
    transforms = []
    for j, (kind, spec) in enumerate(zip(kinds, train.schema)):
        if spec.kind in SCALED_FEATURE_KINDS:
            if kind not in SCALER_KINDS:
                raise ValueError(f"feature {j} is continuous; {kind!r} is not a scaler")
            col = train.X[:, j]
            if kind == "z_score":
                sd = float(np.std(col, ddof=1)) if train.n > 1 else 0.0
                if sd == 0.0:
                    raise ConstantColumnError(f"feature {j} has zero variance")
                transforms.append(FeatureTransform("scaler", kind,
                                                   mean=float(np.mean(col)), sd=sd))
            elif kind == "max_abs":
                m = float(np.max(np.abs(col)))
                if m == 0.0:
                    raise ConstantColumnError(f"feature {j} is identically zero")
                transforms.append(FeatureTransform("scaler", kind, max_abs=m))
            else:
                transforms.append(FeatureTransform("scaler", "none"))
        elif spec.kind in ENCODED_FEATURE_KINDS:
            if kind not in ENCODER_KINDS:
                raise ValueError(f"feature {j} is categorical; {kind!r} is not an encoder")
            transforms.append(FeatureTransform("encoder", kind, levels=_level_table(spec)))
        else:
            raise ValueError(f"unknown feature kind {spec.kind!r}")
    return PreprocessPipeline(transforms)


def _codes(col: np.ndarray, levels: list[float], j: int) -> np.ndarray:
    table = np.asarray(levels)
    pos = np.searchsorted(table, col)
    bad = (pos >= len(table)) | (table[np.minimum(pos, len(table) - 1)] != col)
    if np.any(bad):
        value = col[np.argmax(bad)]
        raise UnseenLevelError(f"feature {j}: level {value} not in fitted table")
    return pos


def apply(pipeline: PreprocessPipeline, data) -> np.ndarray:
    """Transform raw features into the encoded model-input matrix.

    Accepts a DatasetBundle or a raw (n, p) matrix.  Encoded columns are
    ordered feature-major: label emits the zero-based level code, one-hot
    a unit vector over all levels, dummy drops the first level's column,
    and binary writes the big-endian bits of the level code.
    """
    X = data.X if isinstance(data, DatasetBundle) else np.asarray(data, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != pipeline.n_features:
        raise ValueError(f"expected {pipeline.n_features} feature columns")
    n = X.shape[0]
    out = np.zeros((n, pipeline.n_encoded))
    start = 0
    for j, t in enumerate(pipeline.transforms):
        col = X[:, j]
        if t.mode == "scaler":
            if t.kind == "z_score":
                out[:, start] = (col - t.mean) / t.sd
            elif t.kind == "max_abs":
                out[:, start] = col / t.max_abs
            else:
                out[:, start] = col
        else:
            codes = _codes(col, t.levels, j)
            if t.kind == "label":
                out[:, start] = codes
            elif t.kind == "one_hot":
                out[np.arange(n), start + codes] = 1.0
            elif t.kind == "dummy":
                nonref = codes > 0
                out[np.arange(n)[nonref], start + codes[nonref] - 1] = 1.0
            else:
                w = t.width
                for bit in range(w):
                    out[:, start + bit] = (codes >> (w - 1 - bit)) & 1
        start += t.width
    return out


def aggregate_relevance(pipeline: PreprocessPipeline, encoded_relevances) -> np.ndarray:
    """Sum encoded-column relevances back to one column per original feature."""
    R = np.asarray(encoded_relevances, dtype=np.float64)
    if R.ndim != 2 or R.shape[1] != pipeline.n_encoded:
        raise ValueError(f"expected {pipeline.n_encoded} encoded columns, got {R.shape}")
    out = np.empty((R.shape[0], pipeline.n_features))
    for j, cols in enumerate(pipeline.column_map):
        out[:, j] = R[:, cols].sum(axis=1)
    return out


def invert_encoding(pipeline: PreprocessPipeline, encoded) -> np.ndarray:
    """Recover raw level indices from label or one-hot columns (test support)."""
    Z = np.asarray(encoded, dtype=np.float64)
    out = np.empty((Z.shape[0], pipeline.n_features))
    for j, (t, cols) in enumerate(zip(pipeline.transforms, pipeline.column_map)):
        table = np.asarray(t.levels) if t.mode == "encoder" else None
        if t.mode == "scaler":
            raise ValueError("only encoded features can be inverted")
        if t.kind == "label":
            out[:, j] = table[Z[:, cols[0]].astype(int)]
        elif t.kind == "one_hot":
            out[:, j] = table[np.argmax(Z[:, cols], axis=1)]
        else:
            raise ValueError(f"{t.kind} encoding is not invertible here")
    return out
