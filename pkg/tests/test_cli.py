import json

import pytest

from attrsim.cli import main

TINY_CFG = {"hidden_continuous": [16, 8], "hidden_categorical": [16, 8],
            "max_epochs": 6, "early_stop_patience": 6, "n_train": 200,
            "n_test": 50, "mc_samples": 3, "sg_samples": 3, "intgrad_steps": 4,
            "methods": ["grad", "grad_x_input"]}


def _write_cfg(tmp_path, extra=None):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({**TINY_CFG, **(extra or {})}))
    return str(path)


class TestStudyCommands:
    def test_demo_writes_outputs_and_exits_zero(self, tmp_path, capsys):
        out = tmp_path / "out"
        rc = main(["demo", "--config", _write_cfg(tmp_path), "--seed", "3",
                   "--out", str(out)])
        assert rc == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary["study"] == "demo_sec3"
        for name in ("metrics.csv", "aggregates.csv", "model_fit.csv",
                     "config.json", "report.json", "instance_bar.csv",
                     "attributions/grad.csv"):
            assert (out / name).exists()

    def test_flags_override_config_file(self, tmp_path):
        cfg_path = _write_cfg(tmp_path, {"base_seed": 1, "repetitions": 5})
        out = tmp_path / "out"
        rc = main(["prep-study", "--config", cfg_path, "--seed", "42",
                   "--reps", "1", "--out", str(out)])
        assert rc == 0
        echo = json.loads((out / "config.json").read_text())
        assert echo["base_seed"] == 42
        assert echo["repetitions"] == 1

    def test_prep_study_runs_restricted_grid(self, tmp_path, capsys):
        cfg_path = _write_cfg(tmp_path, {"effects": ["linear"],
                                         "scalings": ["z_score"],
                                         "level_counts": []})
        rc = main(["prep-study", "--config", cfg_path, "--reps", "1"])
        assert rc == 0
        assert json.loads(capsys.readouterr().out)["metric_rows"] == 24

    def test_disagreement_with_user_data(self, tmp_path, capsys):
        data = tmp_path / "d.csv"
        rows = ["a,b,y"] + [f"{i * 0.1},{(i * 7) % 5},{i * 0.3}" for i in range(120)]
        data.write_text("\n".join(rows) + "\n")
        schema = tmp_path / "s.json"
        schema.write_text(json.dumps({
            "target": "y",
            "features": [{"name": "a", "kind": "continuous"},
                         {"name": "b", "kind": "continuous"}]}))
        rc = main(["disagreement", "--config", _write_cfg(tmp_path),
                   "--data", str(data), "--schema", str(schema),
                   "--out", str(tmp_path / "out")])
        assert rc == 0
        assert (tmp_path / "out" / "feature_correlation.csv").exists()


class TestErrorHandling:
    def test_missing_config_file(self, capsys):
        rc = main(["demo", "--config", "/does/not/exist.json"])
        assert rc != 0
        err = json.loads(capsys.readouterr().err)
        assert err["error"] == "FileNotFoundError"

    def test_bad_config_key(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"n_trian": 5}))
        rc = main(["demo", "--config", str(path)])
        assert rc != 0
        err = json.loads(capsys.readouterr().err)
        assert err["error"] == "ConfigError"

    def test_invalid_json_config(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text("not json at all")
        rc = main(["demo", "--config", str(path)])
        assert rc != 0
        assert capsys.readouterr().err.startswith("{")

    def test_unknown_command_exits_nonzero(self):
        with pytest.raises(SystemExit):
            main(["frobnicate"])

    def test_disagreement_data_requires_schema(self, tmp_path, capsys):
        data = tmp_path / "d.csv"
        data.write_text("a,y\n1,2\n")
        rc = main(["disagreement", "--data", str(data)])
        assert rc != 0
        err = json.loads(capsys.readouterr().err)
        assert err["error"] == "ConfigError"


class TestIngestCommand:
    def test_ingest_round_trip(self, tmp_path, capsys):
        data = tmp_path / "d.csv"
        data.write_text("a,color,y\n1.0,red,2.0\n2.0,blue,3.0\n3.0,red,4.0\n")
        schema = tmp_path / "s.json"
        schema.write_text(json.dumps({
            "target": "y",
            "features": [{"name": "a", "kind": "continuous"},
                         {"name": "color", "kind": "categorical",
                          "levels": ["red", "blue"]}]}))
        out = tmp_path / "out"
        rc = main(["ingest", str(data), "--schema", str(schema), "--out", str(out)])
        assert rc == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary["rows"] == 3 and summary["features"] == 2
        assert (out / "dataset.csv").exists()
        assert (out / "dataset.csv.meta.json").exists()

    def test_ingest_bad_schema(self, tmp_path, capsys):
        data = tmp_path / "d.csv"
        data.write_text("a,y\n1,2\n")
        schema = tmp_path / "s.json"
        schema.write_text(json.dumps({"features": []}))
        rc = main(["ingest", str(data), "--schema", str(schema),
                   "--out", str(tmp_path / "o")])
        assert rc != 0
        err = json.loads(capsys.readouterr().err)
        assert err["error"] == "IngestError"
