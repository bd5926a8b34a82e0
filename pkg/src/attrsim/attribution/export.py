"""Attribution CSV export: one row per instance, one column per original
feature, with a JSON sidecar describing method, hyperparameters, baseline
and seed."""

from __future__ import annotations

import csv
import json

import numpy as np

from .base import AttributionMatrix


def export_attribution(attr: AttributionMatrix, path, feature_names=None) -> None:
    values = np.asarray(attr.values, dtype=np.float64)
    if feature_names is None:
        feature_names = [f"x{j + 1}" for j in range(values.shape[1])]
    if len(feature_names) != values.shape[1]:
        raise ValueError("one feature name per column required")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(feature_names)
        for row in values:
            writer.writerow([repr(float(v)) for v in row])
    sidecar = {
        "method": attr.method,
        "params": attr.params,
        "baseline": attr.baseline,
        "intercept": [float(v) for v in attr.intercept] if attr.intercept is not None else None,
    }
    with open(f"{path}.meta.json", "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True, default=_jsonify)


def _jsonify(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (tuple, np.ndarray)):
        return list(value)
    raise TypeError(f"not JSON serializable: {type(value)}")
