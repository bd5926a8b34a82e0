import json

import numpy as np
import pytest

from attrsim.dgp import MissingGroundTruthError, generate, DgpSpec, FeatureSpec, export_dataset
from attrsim.experiments import (ConfigError, ExperimentConfig, execute,
                                 ingest_csv, make_config, run_disagreement_matrix,
                                 study_cells)
from attrsim.metrics import ground_truth_correlation

TINY = dict(hidden_continuous=[16, 8], hidden_categorical=[16, 8],
            max_epochs=8, early_stop_patience=8, n_train=240, n_test=60,
            mc_samples=4, sg_samples=4, intgrad_steps=8)


class TestConfig:
    def test_round_trips_through_parser(self):
        cfg = make_config(study="faithfulness_study", repetitions=3, base_seed=9)
        again = ExperimentConfig.from_dict(cfg.to_dict())
        assert again == cfg

    def test_unknown_keys_rejected(self):
        with pytest.raises(ConfigError, match="unknown config keys"):
            make_config(study="demo_sec3", n_trian=100)

    def test_unknown_study_rejected(self):
        with pytest.raises(ConfigError, match="unknown study"):
            make_config(study="ablation")

    def test_prep_study_default_grid(self):
        cfg = make_config(study="prep_study")
        cells = study_cells(cfg)
        continuous = [c for c in cells if "scaling" in c]
        categorical = [c for c in cells if "encoding" in c]
        assert len(continuous) == 3 * 3
        assert len(categorical) == 2 * 4
        assert {c["levels"] for c in categorical} == {4, 12}

    def test_faithfulness_default_coefficients(self):
        cfg = make_config(study="faithfulness_study")
        assert cfg.coefficients == [0.1] * 4 + [0.4] * 4 + [1.0] * 4
        assert cfg.n_train == 2000

    def test_importance_defaults(self):
        cfg = make_config(study="importance_study")
        assert cfg.p == 20
        important = [j for j, c in enumerate(cfg.coefficients) if c]
        assert len(important) == 10
        assert all((j + 1) % 2 == 0 for j in important)
        assert cfg.n_sweep == [500, 1000, 2000, 4000, 8000]

    def test_config_file_parsing(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"study": "demo_sec3", "base_seed": 4}))
        cfg = ExperimentConfig.from_file(path)
        assert cfg.base_seed == 4
        assert cfg.scaling == "none"  # demo default

    def test_coefficient_length_checked(self):
        with pytest.raises(ConfigError, match="coefficients"):
            make_config(study="prep_study", p=3, coefficients=[1.0, 2.0])


class TestPrepStudy:
    def test_smoke_emits_all_cells(self, tmp_path):
        cfg = make_config(study="prep_study", repetitions=1, base_seed=2,
                          methods=["grad_x_input"], out_dir=str(tmp_path), **TINY)
        report = execute(cfg)
        cells = {r[1] for r in report.metric_rows}
        assert len(cells) == 17
        assert len(report.metric_rows) == 17 * 12  # one row per cell x feature
        r2_rows = [r for r in report.model_fit_rows if r[3] == "nn"]
        assert len(r2_rows) == 17
        assert all(np.isfinite(r[4]) for r in r2_rows)
        for name in ("metrics.csv", "aggregates.csv", "model_fit.csv",
                     "config.json", "report.json"):
            assert (tmp_path / name).exists()

    def test_linear_reference_fit_reported(self):
        cfg = make_config(study="prep_study", repetitions=1, effects=["linear"],
                          scalings=["z_score"], level_counts=[], methods=[], **TINY)
        report = execute(cfg)
        models = {r[3] for r in report.model_fit_rows}
        assert models == {"nn", "linear_model"}

    def test_low_fit_flagging(self):
        cfg = make_config(study="prep_study", repetitions=1, effects=["linear"],
                          scalings=["z_score"], level_counts=[], methods=[],
                          r2_floor=2.0, **TINY)
        report = execute(cfg)
        nn_rows = [r for r in report.model_fit_rows if r[3] == "nn"]
        assert all(r[-1] == 1 for r in nn_rows)


class TestFaithfulnessStudy:
    def test_groups_and_cells(self):
        cfg = make_config(study="faithfulness_study", repetitions=1, base_seed=1,
                          effects=["linear", "binary", "categorical"],
                          methods=["deepshap_rescale"], **TINY)
        report = execute(cfg)
        cells = {r[1] for r in report.metric_rows}
        assert cells == {"effect=linear", "effect=binary", "effect=categorical|levels=4"}
        groups = {r[5] for r in report.metric_rows}
        assert groups == {"weak", "medium", "strong"}
        strong = [r for r in report.metric_rows if r[5] == "strong"]
        assert len(strong) == 3 * 4  # cells x features per group


class TestImportanceStudy:
    def test_f1_rows_per_cell(self):
        cfg = make_config(study="importance_study", repetitions=2, base_seed=3,
                          effects=["linear"], n_sweep=[240],
                          methods=["grad", "deepshap_rescale"], **{**TINY, "n_train": None})
        report = execute(cfg)
        rows = [r for r in report.metric_rows if r[6] == "topk_f1"]
        assert len(rows) == 2 * 2  # reps x methods
        assert all(0.0 <= r[7] <= 1.0 for r in rows)

    def test_oracle_attribution_scores_perfect_f1(self):
        # |ground-truth effects| fed through the same ranking gives F1 = 1
        from attrsim.metrics import topk_f1
        rng = np.random.default_rng(0)
        coeffs = [1.0 if (j + 1) % 2 == 0 else 0.0 for j in range(20)]
        feats = [FeatureSpec.continuous_auto(rng, coefficient=c) for c in coeffs]
        b = generate(DgpSpec(feats, n=200, seed=1))
        important = {j for j, c in enumerate(coeffs) if c}
        f1s = [topk_f1(np.abs(b.effects[i]), important, 10) for i in range(b.n)]
        zero_effect_ok = np.abs(b.effects[:, [j for j, c in enumerate(coeffs) if not c]])
        assert np.all(zero_effect_ok == 0.0)
        assert np.mean(f1s) == 1.0


class TestDemoStudy:
    def test_outputs_cover_methods_and_features(self, tmp_path):
        cfg = make_config(study="demo_sec3", base_seed=5, out_dir=str(tmp_path),
                          methods=["grad", "grad_x_input", "intgrad_means"], **TINY)
        report = execute(cfg)
        attr = report.payloads[0]["attributions"]
        assert set(attr) == {"grad", "grad_x_input", "intgrad_means"}
        assert all(v.shape == (cfg.n_test, 4) for v in attr.values())
        for mid in attr:
            lines = (tmp_path / "attributions" / f"{mid}.csv").read_text().splitlines()
            assert lines[0] == "x1,x2,x3,x4"
            assert len(lines) == 1 + cfg.n_test
            meta = json.loads((tmp_path / "attributions" / f"{mid}.csv.meta.json")
                              .read_text())
            assert meta["method"] == mid
        bar = (tmp_path / "instance_bar.csv").read_text().splitlines()
        assert len(bar) == 1 + 3 * 4
        summary = json.loads((tmp_path / "report.json").read_text())
        assert [t["kind"] for t in summary["pipelines"]["all"]["features"]] == \
            ["none", "none", "none", "label"]
        assert summary["seed_provenance"]["base_seed"] == 5

    def test_deterministic_for_fixed_seed(self):
        cfg = make_config(study="demo_sec3", base_seed=7,
                          methods=["grad", "expgrad"], **TINY)
        a, b = execute(cfg), execute(cfg)
        assert a.metric_rows == b.metric_rows


class TestDisagreementStudy:
    def test_matrices_symmetric_with_unit_diagonal(self):
        cfg = make_config(study="disagreement_matrix", base_seed=2,
                          methods=["grad", "grad_x_input", "smoothgrad"], **TINY)
        report = execute(cfg)
        payload = report.payloads[0]
        assert payload["labels"] == ["grad", "grad_x_input", "smoothgrad",
                                     "smoothgrad#2"]
        for name in ("feature_correlation", "kendall_tau", "rank_agreement"):
            M = payload[name]
            np.testing.assert_allclose(M, M.T, atol=1e-12)
            np.testing.assert_allclose(np.diag(M), 1.0, atol=1e-9)

    def test_rank_k_configurable(self):
        cfg = make_config(study="disagreement_matrix", base_seed=2, rank_k=3,
                          methods=["grad", "grad_x_input"], **TINY)
        assert cfg.rank_k == 3
        execute(cfg)


class TestIngest:
    def _write_csv(self, tmp_path):
        path = tmp_path / "user.csv"
        path.write_text(
            "age,color,flag,target\n"
            "1.5,red,0,3.0\n"
            "2.5,blue,1,4.0\n"
            "0.5,green,0,1.0\n"
            "1.0,red,1,2.5\n")
        schema = {"target": "target",
                  "features": [{"name": "age", "kind": "continuous"},
                               {"name": "color", "kind": "categorical",
                                "levels": ["red", "green", "blue"]},
                               {"name": "flag", "kind": "bernoulli"}]}
        return path, schema

    def test_basic_ingest(self, tmp_path):
        path, schema = self._write_csv(tmp_path)
        b = ingest_csv(path, schema)
        assert b.n == 4 and b.p == 3
        assert not b.has_ground_truth()
        np.testing.assert_array_equal(b.X[:, 1], [1, 3, 2, 1])  # level codes
        np.testing.assert_array_equal(b.y, [3.0, 4.0, 1.0, 2.5])

    def test_ground_truth_metrics_refuse_ingested(self, tmp_path):
        path, schema = self._write_csv(tmp_path)
        b = ingest_csv(path, schema)
        with pytest.raises(MissingGroundTruthError):
            ground_truth_correlation(np.zeros((4, 3)), b)

    def test_missing_target_rejected(self, tmp_path):
        path, schema = self._write_csv(tmp_path)
        schema["target"] = "label"
        with pytest.raises(ValueError, match="target"):
            ingest_csv(path, schema)

    def test_unknown_level_rejected(self, tmp_path):
        path, schema = self._write_csv(tmp_path)
        schema["features"][1]["levels"] = ["red", "green"]
        with pytest.raises(ValueError, match="level"):
            ingest_csv(path, schema)

    def test_non_numeric_continuous_rejected(self, tmp_path):
        path, schema = self._write_csv(tmp_path)
        schema["features"][0] = {"name": "color", "kind": "continuous"}
        with pytest.raises(ValueError, match="non-numeric"):
            ingest_csv(path, schema)

    def test_round_trip_of_exported_bundle(self, tmp_path):
        rng = np.random.default_rng(3)
        feats = [FeatureSpec.continuous_auto(rng), FeatureSpec.categorical(12)]
        b = generate(DgpSpec(feats, n=50, seed=9))
        path = tmp_path / "synth.csv"
        export_dataset(b, path)
        schema = {"target": "y",
                  "features": [{"name": "x1", "kind": "continuous"},
                               {"name": "x2", "kind": "categorical",
                                "levels": [str(k) for k in range(1, 13)]}]}
        back = ingest_csv(path, schema)
        np.testing.assert_allclose(back.X, b.X)
        np.testing.assert_allclose(back.y, b.y)

    def test_disagreement_on_ingested_data(self, tmp_path, rng):
        n = 150
        X = rng.normal(size=(n, 3))
        y = X @ np.array([1.0, -2.0, 0.5]) + rng.normal(0, 0.1, n)
        path = tmp_path / "data.csv"
        rows = ["a,b,c,y"] + [",".join(repr(float(v)) for v in [*X[i], y[i]])
                              for i in range(n)]
        path.write_text("\n".join(rows) + "\n")
        schema = {"target": "y", "features": [{"name": k, "kind": "continuous"}
                                              for k in "abc"]}
        bundle = ingest_csv(path, schema)
        cfg = make_config(study="disagreement_matrix", base_seed=1,
                          methods=["grad", "grad_x_input"], **TINY)
        report = run_disagreement_matrix(cfg, data=bundle)
        assert report.payloads[0]["feature_correlation"].shape == (2, 2)


class TestDeterminism:
    def test_identical_rows_across_worker_counts(self):
        base = dict(study="prep_study", repetitions=2, base_seed=13,
                    effects=["linear"], scalings=["z_score"], level_counts=[],
                    methods=["grad_x_input", "expgrad"], **TINY)
        seq = execute(make_config(**base, workers=1))
        par = execute(make_config(**base, workers=2))
        assert seq.metric_rows == par.metric_rows
        assert seq.aggregate_rows == par.aggregate_rows
        assert seq.model_fit_rows == par.model_fit_rows
