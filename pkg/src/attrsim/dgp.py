"""Synthetic additive data-generating processes with known feature effects.

Targets are built as ``y = b0 + sum_j g(x_j) * beta_j + eps`` so every
dataset carries its exact per-instance, per-feature effect matrix.  The
effect transforms cover linear, quadratic, piece-wise linear and
jump-discontinuous relationships plus equidistant categorical effects.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

LINEAR = "linear"
PIECEWISE_LINEAR = "piecewise_linear"
NON_CONTINUOUS = "non_continuous"
QUADRATIC = "quadratic"
CATEGORICAL_EQUIDISTANT = "categorical_equidistant"
EFFECT_KINDS = (LINEAR, PIECEWISE_LINEAR, NON_CONTINUOUS, QUADRATIC,
                CATEGORICAL_EQUIDISTANT)

CONTINUOUS_EFFECTS = (LINEAR, PIECEWISE_LINEAR, NON_CONTINUOUS, QUADRATIC)


class MissingGroundTruthError(ValueError):
    """A ground-truth operation was asked of a bundle without effects."""


def apply_effect(kind: str, x):
    """Evaluate the effect transform g pointwise.

    The piece-wise linear transform is -0.5x for x <= 0 and 1.5x above
    (continuous, kinked at 0); the non-continuous one is x - 1 for x < 0
    and x + 1 otherwise (a jump of 2 at 0).
    """
    x = np.asarray(x, dtype=np.float64)
    if kind == LINEAR:
        return x.copy()
    if kind == QUADRATIC:
        return x * x
    if kind == PIECEWISE_LINEAR:
        return np.where(x <= 0.0, -0.5 * x, 1.5 * x)
    if kind == NON_CONTINUOUS:
        return np.where(x < 0.0, x - 1.0, x + 1.0)
    if kind == CATEGORICAL_EQUIDISTANT:
        raise ValueError("categorical effects need a level count; use categorical_effect")
    raise ValueError(f"unknown effect kind {kind!r}")


def categorical_effect(level, c: int):
    """Equidistant level effects -1 + 2(k-1)/(c-1) for levels k = 1..c."""
    if c < 2:
        raise ValueError("categorical features need at least 2 levels")
    level = np.asarray(level, dtype=np.float64)
    if np.any(level < 1) or np.any(level > c):
        raise ValueError(f"level out of range 1..{c}")
    return -1.0 + 2.0 * (level - 1.0) / (c - 1.0)


@dataclass
class FeatureSpec:
    """Distribution, effect transform and coefficient of one feature."""

    kind: str                     # continuous | categorical | bernoulli | uniform
    effect: str
    coefficient: float
    mean: float = 0.0             # continuous
    sd: float = 1.0               # continuous
    levels: int = 0               # categorical
    q: float = 0.5                # bernoulli
    lo: float = 0.0               # uniform
    hi: float = 1.0               # uniform

    def __post_init__(self):
        if self.kind == "categorical":
            if self.levels < 2:
                raise ValueError("categorical features need at least 2 levels")
            if self.effect != CATEGORICAL_EQUIDISTANT:
                raise ValueError("categorical features use the equidistant effect")
        else:
            if self.effect not in CONTINUOUS_EFFECTS:
                raise ValueError(f"effect {self.effect!r} not valid for kind {self.kind!r}")
        if self.kind == "continuous" and self.sd <= 0:
            raise ValueError("sd must be positive")
        if self.kind == "bernoulli" and not (0.0 <= self.q <= 1.0):
            raise ValueError("q must lie in [0, 1]")
        if self.kind == "uniform" and self.hi <= self.lo:
            raise ValueError("uniform needs lo < hi")
        if self.kind not in ("continuous", "categorical", "bernoulli", "uniform"):
            raise ValueError(f"unknown feature kind {self.kind!r}")

    @classmethod
    def continuous(cls, mean: float, sd: float, effect: str = LINEAR,
                   coefficient: float = 1.0) -> "FeatureSpec":
        return cls("continuous", effect, coefficient, mean=mean, sd=sd)

    @classmethod
    def categorical(cls, levels: int, coefficient: float = 1.0) -> "FeatureSpec":
        return cls("categorical", CATEGORICAL_EQUIDISTANT, coefficient, levels=levels)

    @classmethod
    def bernoulli(cls, q: float, effect: str = LINEAR, coefficient: float = 1.0) -> "FeatureSpec":
        return cls("bernoulli", effect, coefficient, q=q)

    @classmethod
    def uniform(cls, lo: float, hi: float, effect: str = LINEAR,
                coefficient: float = 1.0) -> "FeatureSpec":
        return cls("uniform", effect, coefficient, lo=lo, hi=hi)

    @classmethod
    def continuous_auto(cls, rng: np.random.Generator, effect: str = LINEAR,
                        coefficient: float = 1.0) -> "FeatureSpec":
        """Continuous feature with mean ~ U[-2, 2] and sd ~ U[0.9, 1.1]."""
        return cls.continuous(float(rng.uniform(-2.0, 2.0)),
                              float(rng.uniform(0.9, 1.1)),
                              effect=effect, coefficient=coefficient)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.kind == "continuous":
            return rng.normal(self.mean, self.sd, size=n)
        if self.kind == "categorical":
            return rng.integers(1, self.levels + 1, size=n).astype(np.float64)
        if self.kind == "bernoulli":
            return (rng.random(n) < self.q).astype(np.float64)
        return rng.uniform(self.lo, self.hi, size=n)

    def effect_column(self, x: np.ndarray) -> np.ndarray:
        if self.kind == "categorical":
            return self.coefficient * categorical_effect(x, self.levels)
        return self.coefficient * apply_effect(self.effect, x)

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "effect": self.effect, "coefficient": self.coefficient}
        if self.kind == "continuous":
            d.update(mean=self.mean, sd=self.sd)
        elif self.kind == "categorical":
            d.update(levels=self.levels)
        elif self.kind == "bernoulli":
            d.update(q=self.q)
        else:
            d.update(lo=self.lo, hi=self.hi)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureSpec":
        return cls(**d)


@dataclass
class DgpSpec:
    features: list[FeatureSpec]
    n: int
    seed: int
    intercept: float = 0.0
    noise_sd: float = 1.0

    def __post_init__(self):
        if not self.features:
            raise ValueError("feature list must be non-empty")
        if self.noise_sd < 0:
            raise ValueError("noise_sd must be non-negative")
        if self.n < 1:
            raise ValueError("n must be positive")


@dataclass
class DatasetBundle:
    """Raw features (categoricals as 1-based level indices), targets, schema,
    and -- when generated synthetically -- the exact effect matrix and the
    realized noise."""

    X: np.ndarray
    y: np.ndarray
    schema: list[FeatureSpec]
    effects: np.ndarray | None = None
    noise: np.ndarray | None = None
    intercept: float = 0.0
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def has_ground_truth(self) -> bool:
        return self.effects is not None

    def require_ground_truth(self):
        if self.effects is None:
            raise MissingGroundTruthError(
                "bundle has no ground-truth effects (ingested data?)"
            )

    def subset(self, indices) -> "DatasetBundle":
        indices = np.asarray(indices)
        return DatasetBundle(
            X=self.X[indices],
            y=self.y[indices],
            schema=self.schema,
            effects=None if self.effects is None else self.effects[indices],
            noise=None if self.noise is None else self.noise[indices],
            intercept=self.intercept,
            meta=dict(self.meta),
        )


def generate(spec: DgpSpec) -> DatasetBundle:
    """Sample a dataset from the additive process; deterministic per seed.

    Columns are drawn feature by feature in schema order, then the noise
    vector, so a fixed seed pins the entire bundle.
    """
    rng = np.random.default_rng(spec.seed)
    n, p = spec.n, len(spec.features)
    X = np.empty((n, p))
    E = np.empty((n, p))
    for j, f in enumerate(spec.features):
        X[:, j] = f.sample(rng, n)
        E[:, j] = f.effect_column(X[:, j])
    noise = rng.normal(0.0, spec.noise_sd, size=n) if spec.noise_sd > 0 else np.zeros(n)
    y = spec.intercept + E.sum(axis=1) + noise
    return DatasetBundle(X=X, y=y, schema=list(spec.features), effects=E,
                         noise=noise, intercept=spec.intercept,
                         meta={"seed": spec.seed, "noise_sd": spec.noise_sd})


def sec3_running_example(n: int, seed) -> DatasetBundle:
    """The running regression example: y = x1 + x2 + x3^2 + x4 + eps with
    x1 ~ N(0,1), x2 ~ N(2,1), x3 ~ U(-1,2), x4 ~ Bern(0.4)."""
    features = [
        FeatureSpec.continuous(0.0, 1.0),
        FeatureSpec.continuous(2.0, 1.0),
        FeatureSpec.uniform(-1.0, 2.0, effect=QUADRATIC),
        FeatureSpec.bernoulli(0.4),
    ]
    return generate(DgpSpec(features=features, n=n, seed=seed))


def additivity_residual(bundle: DatasetBundle) -> np.ndarray:
    """Per-instance |y - (b0 + sum_j E_ij + eps_i)|, recomputed in the same
    association order as generation; exactly zero for generated bundles."""
    bundle.require_ground_truth()
    reconstructed = bundle.intercept + bundle.effects.sum(axis=1) + bundle.noise
    return np.abs(bundle.y - reconstructed)


def split(bundle: DatasetBundle, fractions, seed):
    """Partition a bundle by a seeded shuffle into len(fractions) bundles.

    Fractions must sum to 1.  A fraction of exactly 0 yields an
    intentionally empty part; a positive fraction that rounds to zero rows
    is an error.
    """
    fractions = [float(f) for f in fractions]
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ValueError("fractions must sum to 1")
    rng = np.random.default_rng(seed)
    order = rng.permutation(bundle.n)
    bounds = np.floor(np.cumsum(fractions) * bundle.n + 1e-9).astype(int)
    parts = []
    start = 0
    for frac, stop in zip(fractions, bounds):
        if frac > 0.0 and stop - start == 0:
            raise ValueError(f"fraction {frac} produces an empty partition")
        parts.append(bundle.subset(order[start:stop]))
        start = stop
    return tuple(parts)


def feature_names(p: int) -> list[str]:
    return [f"x{j + 1}" for j in range(p)]


def export_dataset(bundle: DatasetBundle, path) -> None:
    """Write features and target as CSV plus a JSON sidecar with the schema,
    so ground-truth effects can be rebuilt on import."""
    names = feature_names(bundle.p)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(names + ["y"])
        for i in range(bundle.n):
            row = [_fmt_cell(bundle.X[i, j], bundle.schema[j]) for j in range(bundle.p)]
            row.append(repr(float(bundle.y[i])))
            writer.writerow(row)
    sidecar = {
        "schema": [f.to_dict() for f in bundle.schema],
        "intercept": bundle.intercept,
        "has_ground_truth": bundle.has_ground_truth(),
        "meta": bundle.meta,
    }
    with open(_sidecar_path(path), "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)


def import_dataset(path) -> DatasetBundle:
    """Read a dataset exported by :func:`export_dataset`, recomputing the
    effect matrix and noise from the sidecar schema."""
    with open(_sidecar_path(path)) as fh:
        sidecar = json.load(fh)
    schema = [FeatureSpec.from_dict(d) for d in sidecar["schema"]]
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != feature_names(len(schema)) + ["y"]:
            raise ValueError("dataset header does not match sidecar schema")
        rows = [[float(v) for v in row] for row in reader]
    data = np.asarray(rows, dtype=np.float64)
    X, y = data[:, :-1], data[:, -1]
    intercept = float(sidecar["intercept"])
    if sidecar.get("has_ground_truth", True):
        E = np.column_stack([schema[j].effect_column(X[:, j]) for j in range(len(schema))])
        noise = y - intercept - E.sum(axis=1)
    else:
        E, noise = None, None
    return DatasetBundle(X=X, y=y, schema=schema, effects=E, noise=noise,
                         intercept=intercept, meta=sidecar.get("meta", {}))


def _fmt_cell(value: float, spec: FeatureSpec) -> str:
    if spec.kind == "categorical":
        return str(int(value))
    return repr(float(value))


def _sidecar_path(path) -> str:
    return f"{path}.meta.json"
