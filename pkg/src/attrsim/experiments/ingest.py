"""CSV ingestion for user-supplied tabular data.

Ingested bundles carry no ground-truth effect matrix; operations that need
one refuse them with a clear error.  Categorical string levels are mapped
to 1-based level indices so the rest of the pipeline treats ingested and
synthetic data alike.
"""

from __future__ import annotations

import csv
import json

import numpy as np

from ..dgp import DatasetBundle, FeatureSpec


class IngestError(ValueError):
    """Schema/data mismatch while reading a user CSV."""


def load_schema(path_or_dict) -> dict:
    if path_or_dict is None:
        raise IngestError("a schema (path or dict) is required to ingest a CSV")
    if isinstance(path_or_dict, dict):
        schema = path_or_dict
    else:
        with open(path_or_dict) as fh:
            schema = json.load(fh)
    if not isinstance(schema, dict) or "target" not in schema or "features" not in schema:
        raise IngestError("schema needs 'target' and 'features' keys")
    for f in schema["features"]:
        if "name" not in f or f.get("kind") not in ("continuous", "categorical", "bernoulli"):
            raise IngestError(f"bad feature entry {f!r}")
    return schema


def _sorted_levels(values: list[str]) -> list[str]:
    try:
        return sorted(set(values), key=float)
    except ValueError:
        return sorted(set(values))


def ingest_csv(path, schema) -> DatasetBundle:
    """Read a headered CSV into a bundle without ground-truth effects."""
    schema = load_schema(schema)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise IngestError("empty CSV")
        rows = list(reader)
    if not rows:
        raise IngestError("CSV has no data rows")
    col_index = {name: i for i, name in enumerate(header)}
    target = schema["target"]
    if target not in col_index:
        raise IngestError(f"target column {target!r} not in CSV header")

    n = len(rows)
    p = len(schema["features"])
    X = np.empty((n, p))
    specs: list[FeatureSpec] = []
    level_maps: dict[str, list[str]] = {}
    for j, feat in enumerate(schema["features"]):
        name, kind = feat["name"], feat["kind"]
        if name not in col_index:
            raise IngestError(f"feature column {name!r} not in CSV header")
        raw = [row[col_index[name]] for row in rows]
        if kind == "continuous":
            try:
                X[:, j] = [float(v) for v in raw]
            except ValueError as exc:
                raise IngestError(f"non-numeric value in continuous column {name!r}: {exc}")
            specs.append(FeatureSpec.continuous(0.0, 1.0, coefficient=0.0))
        elif kind == "bernoulli":
            vals = set(raw)
            if not vals <= {"0", "1", "0.0", "1.0"}:
                raise IngestError(f"bernoulli column {name!r} must contain only 0/1")
            X[:, j] = [float(v) for v in raw]
            specs.append(FeatureSpec.bernoulli(0.5, coefficient=0.0))
        else:
            levels = [str(v) for v in feat["levels"]] if "levels" in feat else _sorted_levels(raw)
            table = {v: k + 1 for k, v in enumerate(levels)}
            try:
                X[:, j] = [table[v] for v in raw]
            except KeyError as exc:
                raise IngestError(f"unknown level {exc} in column {name!r}")
            specs.append(FeatureSpec.categorical(len(levels), coefficient=0.0))
            level_maps[name] = levels

    try:
        y = np.asarray([float(row[col_index[target]]) for row in rows])
    except ValueError as exc:
        raise IngestError(f"non-numeric target value: {exc}")
    meta = {"source": str(path), "target": target,
            "feature_names": [f["name"] for f in schema["features"]],
            "level_maps": level_maps}
    return DatasetBundle(X=X, y=y, schema=specs, effects=None, noise=None, meta=meta)
