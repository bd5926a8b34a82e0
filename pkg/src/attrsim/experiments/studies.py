"""Study implementations: cell grids, per-repetition units, and metric rows.

Every stochastic component draws from a stream derived deterministically
from (base_seed, stream tag, cell or DGP key, repetition), so results are
identical no matter how units are scheduled across workers.  Cells that
share a DGP key (e.g. the same effect type under different scalings) see
identical generated data within a repetition, which pairs the comparisons
the studies are about.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..attribution import (STOCHASTIC_METHODS, AttributionMatrix, MethodConfig,
                           run_method)
from ..dgp import DatasetBundle, DgpSpec, FeatureSpec, generate, sec3_running_example, split
from ..metrics import (ground_truth_correlation, kendall_tau,
                       method_correlation_matrix, r_squared, rank_agreement,
                       topk_f1)
from ..network import kaiming_uniform_init, predict
from ..preprocess import aggregate_relevance, apply, fit, standard_kinds
from ..training import TrainConfig, train
from .config import ExperimentConfig
from .ingest import ingest_csv

# seed stream tags (second entry of every seed tuple)
_S_DGP = 1
_S_DATA = 2
_S_TEST = 3
_S_SPLIT = 4
_S_INIT = 5
_S_TRAIN = 6
_S_METHOD = 7
_S_METHOD_ALT = 8

_CELL_KEY_ORDER = ("effect", "levels", "encoding", "scaling", "n")

_GROUP_NAMES = {0.1: "weak", 0.4: "medium", 1.0: "strong"}


@dataclass
class UnitResult:
    cell_index: int
    repetition: int
    cell_id: str
    # rows: (method, feature, group, metric, value, flag)
    metric_rows: list = field(default_factory=list)
    # rows: (model, r_squared, train_n, eval_n, epochs)
    model_fit: list = field(default_factory=list)
    payload: dict = field(default_factory=dict)


def cell_id(cell: dict) -> str:
    parts = [f"{k}={cell[k]}" for k in _CELL_KEY_ORDER if k in cell]
    return "|".join(parts) if parts else "all"


def study_cells(cfg: ExperimentConfig) -> list[dict]:
    """Enumerate the study's cells, attaching a DGP key that identifies
    which cells share generated data within a repetition."""
    cells: list[dict] = []
    if cfg.study == "prep_study":
        for effect in cfg.effects:
            for scaling in cfg.scalings:
                cells.append({"effect": effect, "scaling": scaling})
        for levels in cfg.level_counts:
            for encoding in cfg.encodings:
                cells.append({"effect": "categorical", "levels": levels,
                              "encoding": encoding})
    elif cfg.study == "faithfulness_study":
        for effect in cfg.effects:
            cell = {"effect": effect}
            if effect == "categorical":
                cell["levels"] = cfg.levels
            cells.append(cell)
    elif cfg.study == "importance_study":
        for effect in cfg.effects:
            for n in cfg.n_sweep:
                cell = {"effect": effect, "n": n}
                if effect == "categorical":
                    cell["levels"] = cfg.levels
                cells.append(cell)
    else:  # demo_sec3, disagreement_matrix: a single unit
        cells.append({})

    signatures: dict[tuple, int] = {}
    for cell in cells:
        sig = (cell.get("effect"), cell.get("levels"))
        cell["dgp_key"] = signatures.setdefault(sig, len(signatures))
    return cells


def _categorical_input(effect: str) -> bool:
    return effect in ("binary", "categorical")


def _build_features(cfg: ExperimentConfig, cell: dict, rep: int) -> list[FeatureSpec]:
    effect = cell["effect"]
    coeffs = cfg.coefficients if cfg.coefficients is not None else [1.0] * cfg.p
    rng = np.random.default_rng((cfg.base_seed, _S_DGP, cell["dgp_key"], rep))
    feats = []
    for c in coeffs:
        if effect == "binary":
            feats.append(FeatureSpec.categorical(2, coefficient=c))
        elif effect == "categorical":
            feats.append(FeatureSpec.categorical(cell.get("levels", cfg.levels),
                                                 coefficient=c))
        else:
            feats.append(FeatureSpec.continuous_auto(rng, effect=effect, coefficient=c))
    return feats


def _transform_kinds(cfg: ExperimentConfig, cell: dict, schema) -> list[str]:
    if cfg.study == "prep_study":
        choice = cell.get("encoding") or cell.get("scaling")
        return [choice] * len(schema)
    return standard_kinds(schema, scaler=cfg.scaling,
                          binary_encoding=cfg.binary_encoding,
                          categorical_encoding=cfg.categorical_encoding)


def _train_config(cfg: ExperimentConfig, seed) -> TrainConfig:
    return TrainConfig(max_epochs=cfg.max_epochs, initial_lr=cfg.initial_lr,
                       lr_decay_factor=cfg.lr_decay_factor,
                       lr_decay_every=cfg.lr_decay_every,
                       early_stop_patience=cfg.early_stop_patience,
                       batch_size=cfg.batch_size, seed=seed)


def _method_config(cfg: ExperimentConfig, seed) -> MethodConfig:
    return MethodConfig(sg_samples=cfg.sg_samples, sg_noise=cfg.sg_noise,
                        intgrad_steps=cfg.intgrad_steps, mc_samples=cfg.mc_samples,
                        lrp_epsilon=cfg.lrp_epsilon, lrp_alpha=cfg.lrp_alpha,
                        seed=seed)


def _linear_fit_r2(X_train, y_train, X_test, y_test) -> float:
    A = np.column_stack([X_train, np.ones(X_train.shape[0])])
    coef, *_ = np.linalg.lstsq(A, y_train, rcond=None)
    preds = np.column_stack([X_test, np.ones(X_test.shape[0])]) @ coef
    return r_squared(preds, y_test)


@dataclass
class _FittedCell:
    net: object
    pipeline: object
    X_train: np.ndarray
    X_test: np.ndarray
    test_bundle: DatasetBundle
    r2: float
    r2_linear: float
    epochs: int
    train_n: int
    eval_n: int


def _fit_cell(cfg: ExperimentConfig, cell: dict, cell_index: int, rep: int,
              bundles=None) -> _FittedCell:
    if bundles is None:
        features = _build_features(cfg, cell, rep)
        effect = cell["effect"]
        n_train = cell.get("n") or cfg.n_train or \
            (2000 if _categorical_input(effect) else 4000)
        data = generate(DgpSpec(features, n=n_train,
                                seed=(cfg.base_seed, _S_DATA, cell["dgp_key"], rep),
                                noise_sd=cfg.noise_sd))
        train_b, eval_b, _ = split(data, (2 / 3, 1 / 3, 0),
                                   seed=(cfg.base_seed, _S_SPLIT, cell["dgp_key"], rep))
        test_b = generate(DgpSpec(features, n=cfg.n_test,
                                  seed=(cfg.base_seed, _S_TEST, cell["dgp_key"], rep),
                                  noise_sd=cfg.noise_sd))
        categorical_input = _categorical_input(effect)
    else:
        train_b, eval_b, test_b = bundles
        categorical_input = all(f.kind in ("categorical", "bernoulli")
                                for f in train_b.schema)

    pipeline = fit(_transform_kinds(cfg, cell, train_b.schema), train_b)
    X_train = apply(pipeline, train_b)
    X_eval = apply(pipeline, eval_b)
    X_test = apply(pipeline, test_b)

    hidden = cfg.hidden_categorical if categorical_input else cfg.hidden_continuous
    net0 = kaiming_uniform_init([X_train.shape[1], *hidden, 1],
                                seed=(cfg.base_seed, _S_INIT, cell_index, rep),
                                dropout_rate=cfg.dropout)
    net, hist = train(net0, (X_train, train_b.y), (X_eval, eval_b.y),
                      _train_config(cfg, (cfg.base_seed, _S_TRAIN, cell_index, rep)))
    r2 = r_squared(predict(net, X_test), test_b.y)
    r2_lin = _linear_fit_r2(X_train, train_b.y, X_test, test_b.y)
    return _FittedCell(net=net, pipeline=pipeline, X_train=X_train, X_test=X_test,
                       test_bundle=test_b, r2=r2, r2_linear=r2_lin,
                       epochs=hist.stopped_epoch + 1,
                       train_n=train_b.n, eval_n=eval_b.n)


def _aggregated_attributions(cfg: ExperimentConfig, fitted: _FittedCell,
                             cell_index: int, rep: int, stream: int = _S_METHOD,
                             methods=None):
    mcfg = _method_config(cfg, (cfg.base_seed, stream, cell_index, rep))
    for mid in (methods if methods is not None else cfg.methods):
        attr = run_method(mid, fitted.net, fitted.X_test, fitted.X_train, mcfg)
        yield mid, aggregate_relevance(fitted.pipeline, attr.values)


def run_unit(cfg: ExperimentConfig, cell: dict, cell_index: int, rep: int) -> UnitResult:
    """Execute one (cell, repetition) work unit."""
    if cfg.study == "demo_sec3":
        return _demo_unit(cfg)
    if cfg.study == "disagreement_matrix":
        return _disagreement_unit(cfg)

    result = UnitResult(cell_index=cell_index, repetition=rep, cell_id=cell_id(cell))
    fitted = _fit_cell(cfg, cell, cell_index, rep)
    result.model_fit.append(("nn", fitted.r2, fitted.train_n, fitted.eval_n,
                             fitted.epochs))
    result.model_fit.append(("linear_model", fitted.r2_linear, fitted.train_n,
                             fitted.eval_n, 0))
    if rep == 0:
        result.payload["pipeline"] = {"cell": result.cell_id,
                                      "spec": fitted.pipeline.to_dict()}

    coeffs = cfg.coefficients if cfg.coefficients is not None else [1.0] * cfg.p
    if cfg.study == "importance_study":
        important = {j for j, c in enumerate(coeffs) if c != 0.0}
        for mid, agg in _aggregated_attributions(cfg, fitted, cell_index, rep):
            f1 = float(np.mean([topk_f1(agg[i], important, cfg.top_k)
                                for i in range(agg.shape[0])]))
            result.metric_rows.append((mid, "", "", "topk_f1", f1, 0))
    else:  # prep_study, faithfulness_study
        groups = [_group_name(c) if cfg.study == "faithfulness_study" else ""
                  for c in coeffs]
        for mid, agg in _aggregated_attributions(cfg, fitted, cell_index, rep):
            rs, flags = ground_truth_correlation(agg, fitted.test_bundle)
            for j in range(cfg.p):
                result.metric_rows.append((mid, f"x{j + 1}", groups[j],
                                           "gt_correlation", float(rs[j]),
                                           int(flags[j])))
    return result


def _group_name(coefficient: float) -> str:
    return _GROUP_NAMES.get(coefficient, f"beta={coefficient:g}")


_DEMO_QUANTILES = ((0.01, "q01"), (0.25, "q25"), (0.50, "q50"),
                   (0.75, "q75"), (0.99, "q99"))


def _demo_unit(cfg: ExperimentConfig) -> UnitResult:
    result = UnitResult(cell_index=0, repetition=0, cell_id="all")
    data = sec3_running_example(cfg.n_train, seed=(cfg.base_seed, _S_DATA, 0, 0))
    train_b, eval_b, _ = split(data, (2 / 3, 1 / 3, 0),
                               seed=(cfg.base_seed, _S_SPLIT, 0, 0))
    test_b = sec3_running_example(cfg.n_test, seed=(cfg.base_seed, _S_TEST, 0, 0))
    fitted = _fit_cell(cfg, {}, 0, 0, bundles=(train_b, eval_b, test_b))
    result.model_fit.append(("nn", fitted.r2, fitted.train_n, fitted.eval_n,
                             fitted.epochs))
    result.model_fit.append(("linear_model", fitted.r2_linear, fitted.train_n,
                             fitted.eval_n, 0))

    attributions = {}
    exports = []
    mcfg = _method_config(cfg, (cfg.base_seed, _S_METHOD, 0, 0))
    for mid in cfg.methods:
        attr = run_method(mid, fitted.net, fitted.X_test, fitted.X_train, mcfg)
        agg = aggregate_relevance(fitted.pipeline, attr.values)
        attributions[mid] = agg
        exports.append(AttributionMatrix(values=agg, method=mid,
                                         params=attr.params, baseline=attr.baseline,
                                         intercept=attr.intercept))
        for j in range(agg.shape[1]):
            col = agg[:, j]
            feature = f"x{j + 1}"
            result.metric_rows.append((mid, feature, "", "attr_mean",
                                       float(col.mean()), 0))
            for q, label in _DEMO_QUANTILES:
                result.metric_rows.append((mid, feature, "", f"attr_{label}",
                                           float(np.quantile(col, q)), 0))
    result.payload["attributions"] = attributions
    result.payload["attribution_exports"] = exports
    result.payload["bar_instance"] = 0
    result.payload["pipeline"] = {"cell": "all", "spec": fitted.pipeline.to_dict()}
    return result


def _disagreement_unit(cfg: ExperimentConfig,
                       data: DatasetBundle | None = None) -> UnitResult:
    result = UnitResult(cell_index=0, repetition=0, cell_id="all")
    if data is None and cfg.data_csv is not None:
        data = ingest_csv(cfg.data_csv, cfg.data_schema)
    if data is not None:
        train_b, eval_b, test_b = split(data, (0.6, 0.2, 0.2),
                                        seed=(cfg.base_seed, _S_SPLIT, 0, 0))
        fitted = _fit_cell(cfg, {}, 0, 0, bundles=(train_b, eval_b, test_b))
    else:
        cell = {"effect": cfg.effect, "dgp_key": 0}
        if cfg.effect == "categorical":
            cell["levels"] = cfg.levels
        fitted = _fit_cell(cfg, cell, 0, 0)
    result.model_fit.append(("nn", fitted.r2, fitted.train_n, fitted.eval_n,
                             fitted.epochs))
    result.payload["pipeline"] = {"cell": "all", "spec": fitted.pipeline.to_dict()}

    named = list(_aggregated_attributions(cfg, fitted, 0, 0))
    # extend the matrix with a differently seeded copy of each stochastic method
    stochastic = [mid for mid in cfg.methods if mid in STOCHASTIC_METHODS]
    for mid, agg in _aggregated_attributions(cfg, fitted, 0, 0,
                                             stream=_S_METHOD_ALT,
                                             methods=stochastic):
        named.append((f"{mid}#2", agg))

    labels, feat_corr = method_correlation_matrix(named)
    m = len(labels)
    n_inst = named[0][1].shape[0]
    kendall = np.eye(m)
    agreement = np.ones((m, m))
    for i in range(m):
        for j in range(i + 1, m):
            taus = [kendall_tau(named[i][1][r], named[j][1][r]) for r in range(n_inst)]
            kendall[i, j] = kendall[j, i] = float(np.mean(taus))
            ras = [rank_agreement(named[i][1][r], named[j][1][r], cfg.rank_k)
                   for r in range(n_inst)]
            agreement[i, j] = agreement[j, i] = float(np.mean(ras))
    result.payload["labels"] = labels
    result.payload["feature_correlation"] = feat_corr
    result.payload["kendall_tau"] = kendall
    result.payload["rank_agreement"] = agreement
    for i in range(m):
        for j in range(m):
            result.metric_rows.append((labels[i], labels[j], "",
                                       "feature_correlation",
                                       float(feat_corr[i, j]), 0))
            result.metric_rows.append((labels[i], labels[j], "", "kendall_tau",
                                       float(kendall[i, j]), 0))
            result.metric_rows.append((labels[i], labels[j], "", "rank_agreement",
                                       float(agreement[i, j]), 0))
    return result
