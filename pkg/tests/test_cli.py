"""End-to-end command-line checks: datagen determinism, the train/eval round
trip, exit-code conventions, and the single-shot commands. Commands run
in-process through main() so coverage and monkeypatching work."""

import json
from pathlib import Path

import numpy as np
import pytest

from gwhp import cli, fieldio
from gwhp.cli import main
from gwhp.dataset import NormStats, read_manifest
from gwhp.simulate import generate_scenario


def run(*argv):
    return main([str(a) for a in argv])


def datagen(out, count=3, seed=11, days=40.0, workers=1):
    return run("datagen", "--count", count, "--seed", seed, "--out", out,
               "--days", days, "--workers", workers)


def dir_bytes(path, skip=("run_manifest.json",)):
    out = {}
    for p in sorted(Path(path).iterdir()):
        if p.name in skip:
            continue
        out[p.name] = p.read_bytes()
    return out


@pytest.fixture(scope="module")
def data_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli") / "data"
    assert datagen(d, count=6, seed=3) == 0
    return d


class TestDatagen:
    def test_writes_samples_and_manifests(self, tmp_path, capsys):
        out = tmp_path / "d"
        assert datagen(out, count=2, seed=5) == 0
        assert "generated 2/2" in capsys.readouterr().out
        manifest = read_manifest(out / "manifest.json")
        assert manifest["master_seed"] == 5
        assert [e["file"] for e in manifest["files"]] == ["sample_00000.gwhp",
                                                          "sample_00001.gwhp"]
        for entry in manifest["files"]:
            chans = fieldio.read_fields(out / entry["file"])
            assert set(chans) == {"permeability", "pressure", "qx", "qy", "temperature"}
        run_doc = json.loads((out / "run_manifest.json").read_text())
        assert run_doc["command"] == "datagen"
        assert run_doc["generated"] == 2 and run_doc["failed"] == 0

    def test_two_runs_byte_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert datagen(a, count=3, seed=9) == 0
        assert datagen(b, count=3, seed=9) == 0
        assert dir_bytes(a) == dir_bytes(b)

    def test_worker_count_does_not_change_output(self, tmp_path):
        a, b = tmp_path / "w1", tmp_path / "w2"
        assert datagen(a, count=2, seed=4, workers=1) == 0
        assert datagen(b, count=2, seed=4, workers=2) == 0
        assert dir_bytes(a) == dir_bytes(b)

    def test_seed_changes_content(self, tmp_path):
        a, b = tmp_path / "s1", tmp_path / "s2"
        assert datagen(a, count=1, seed=1) == 0
        assert datagen(b, count=1, seed=2) == 0
        assert dir_bytes(a)["sample_00000.gwhp"] != dir_bytes(b)["sample_00000.gwhp"]

    def test_scenario_failure_exits_2(self, tmp_path, monkeypatch, capsys):
        real = cli.simulate.run_scenario

        def flaky(spec, *a, **kw):
            if spec.scenario_id.endswith("00001"):
                raise RuntimeError("synthetic melt-down")
            return real(spec, *a, **kw)

        monkeypatch.setattr(cli.simulate, "run_scenario", flaky)
        out = tmp_path / "d"
        assert datagen(out, count=3, seed=8) == 2
        assert "scenario 1 failed" in capsys.readouterr().err
        manifest = read_manifest(out / "manifest.json")
        assert len(manifest["files"]) == 2  # survivors still listed

    def test_unwritable_out_is_runtime_failure(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        assert datagen(blocker / "sub", count=1, seed=1) == 2


TRAIN_CONFIG = {
    "version": 1,
    "split": {"seed": 0, "val_fraction": 0.25, "test_count": 1,
              "augment_per_sample": 1},
    "model": {},
    "train": {"learning_rate": 1e-3, "batch_size": 4, "epochs": 2,
              "seed": 0, "checkpoint_every": 1},
}


@pytest.fixture(scope="module")
def trained(data_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("train")
    cfg = out / "config.json"
    cfg.write_text(json.dumps(TRAIN_CONFIG))
    assert run("train", "--data", data_dir, "--config", cfg, "--out", out) == 0
    return out


@pytest.fixture(scope="module")
def model_path(tmp_path_factory):
    from gwhp.surrogate import build_model, save_model
    path = tmp_path_factory.mktemp("predict") / "model.gwnn"
    save_model(build_model(seed=0, norm_stats=NormStats(0, 4e-6, 0, 4e-6, 1, 2.5)),
               path)
    return path


class TestTrainEval:
    def test_train_outputs(self, trained, data_dir):
        from gwhp.surrogate import load_model
        model = load_model(trained / "model.gwnn")
        assert model.norm_stats is not None
        history = json.loads((trained / "history.json").read_text())
        assert len(history["train_loss"]) == 2
        manifest = json.loads((trained / "manifest.json").read_text())
        assert manifest["command"] == "train"
        assignment = manifest["split_assignment"]
        assert len(assignment) == 6
        assert sorted(set(assignment.values())) == ["test", "train", "validation"]

    def test_eval_round_trip(self, trained, data_dir, tmp_path, capsys):
        out = tmp_path / "eval"
        assert run("eval", "--model", trained / "model.gwnn", "--data", data_dir,
                   "--config", trained / "config.json", "--out", out) == 0
        stdout = capsys.readouterr().out
        assert "aggregate relative error" in stdout
        report = json.loads((out / "report.json").read_text())
        assert len(report["samples"]) == 1
        assert report["latency_ms"]["count"] == 1
        assert len(list((out / "renders").glob("*.png"))) == 1

    def test_unknown_config_key_exits_1(self, data_dir, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"version": 1, "optimizer": "sgd"}))
        assert run("train", "--data", data_dir, "--config", cfg,
                   "--out", tmp_path / "o") == 1
        assert "optimizer" in capsys.readouterr().err

    def test_wrong_config_version_exits_1(self, data_dir, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"version": 7}))
        assert run("train", "--data", data_dir, "--config", cfg,
                   "--out", tmp_path / "o") == 1

    def test_malformed_json_exits_1(self, data_dir, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text("{nope")
        assert run("train", "--data", data_dir, "--config", cfg,
                   "--out", tmp_path / "o") == 1

    def test_missing_data_dir_exits_1(self, trained, tmp_path):
        assert run("train", "--data", tmp_path / "absent", "--out", tmp_path / "o") == 1


class TestPredict:
    def test_predict_writes_container(self, model_path, tmp_path, capsys):
        scen = tmp_path / "scenario.json"
        scen.write_text(json.dumps(generate_scenario(21, 0).to_json()))
        out = tmp_path / "fields.gwhp"
        assert run("predict", "--model", model_path, "--scenario", scen,
                   "--out", out) == 0
        assert "wrote" in capsys.readouterr().out
        chans = fieldio.read_fields(out)
        assert set(chans) == {"permeability", "pressure", "qx", "qy", "temperature"}
        assert np.isfinite(chans["temperature"]).all()
        sidecar = json.loads(out.with_suffix(".manifest.json").read_text())
        assert sidecar["command"] == "predict"
        assert sidecar["seeds"]["geology_seed"] == generate_scenario(21, 0).geology.seed

    def test_missing_scenario_exits_1(self, model_path, tmp_path):
        assert run("predict", "--model", model_path,
                   "--scenario", tmp_path / "none.json", "--out", tmp_path / "o") == 1

    def test_corrupt_model_exits_1(self, tmp_path):
        bad = tmp_path / "bad.gwnn"
        bad.write_bytes(b"JUNKJUNKJUNK")
        scen = tmp_path / "s.json"
        scen.write_text(json.dumps(generate_scenario(21, 0).to_json()))
        assert run("predict", "--model", bad, "--scenario", scen,
                   "--out", tmp_path / "o") == 1


class TestLahmCommand:
    def params_doc(self, **kw):
        doc = {"version": 1,
               "lahm": {"velocity": 3e-6},
               "grid": {"nx": 32, "ny": 32},
               "well_cell": [8, 16],
               "flow_angle": 0.0}
        doc.update(kw)
        return doc

    def test_renders_field(self, tmp_path):
        p = tmp_path / "lahm.json"
        p.write_text(json.dumps(self.params_doc()))
        out = tmp_path / "plume.gwhp"
        assert run("lahm", "--params", p, "--out", out) == 0
        chans = fieldio.read_fields(out)
        assert list(chans) == ["temperature"]
        assert chans["temperature"].shape == (32, 32)
        assert chans["temperature"].max() > 10.0
        assert out.with_suffix(".manifest.json").exists()

    def test_bad_version_exits_1(self, tmp_path):
        p = tmp_path / "lahm.json"
        p.write_text(json.dumps(self.params_doc(version=3)))
        assert run("lahm", "--params", p, "--out", tmp_path / "o") == 1

    def test_unknown_param_key_exits_1(self, tmp_path):
        p = tmp_path / "lahm.json"
        p.write_text(json.dumps(self.params_doc(lahm={"spin": 1})))
        assert run("lahm", "--params", p, "--out", tmp_path / "o") == 1


class TestEntryPoint:
    def test_usage_error_exits_1(self, capsys):
        assert run("datagen", "--count", "2") == 1  # --seed/--out missing
        assert "error" in capsys.readouterr().err

    def test_unknown_command_exits_1(self):
        assert run("transmogrify") == 1

    def test_help_exits_0(self, capsys):
        assert run("--help") == 0
        assert "datagen" in capsys.readouterr().out

    def test_serve_env_overrides(self, monkeypatch):
        import argparse
        monkeypatch.setenv("GWHP_MODEL", "/tmp/m.gwnn")
        monkeypatch.setenv("GWHP_PORT", "9999")
        monkeypatch.setenv("GWHP_MAX_SIMULATIONS", "7")
        monkeypatch.setenv("GWHP_CORS_ORIGIN", "http://x")
        ns = argparse.Namespace(model=None, port=8000, max_simulations=1,
                                cors_origin=None, host="127.0.0.1")
        cli._env_override(ns)
        assert (ns.model, ns.port, ns.max_simulations, ns.cors_origin) == \
            ("/tmp/m.gwnn", 9999, 7, "http://x")
