"""End-to-end command-line behavior with desk-scale configurations."""

import csv
import json

import pytest

from greenhouse_pinn.cli import main

TINY_TRAINING = {
    "iterations": 120,
    "hidden_layers": 1,
    "hidden_width": 8,
    "collocation_count": 16,
    "log_every": 20,
}

TINY_GENERATE = {
    "grid": {"start": 0.0, "end": 72.0, "step": 0.5},
    "fraction": 0.5,
}


@pytest.fixture()
def tiny_dataset(tmp_path):
    cfg = tmp_path / "generate.json"
    cfg.write_text(json.dumps(TINY_GENERATE))
    out = tmp_path / "data"
    assert main(["generate", "--config", str(cfg), "--seed", "3",
                 "--output", str(out)]) == 0
    return out / "dataset.json"


@pytest.fixture()
def train_config(tmp_path):
    path = tmp_path / "training.json"
    path.write_text(json.dumps(TINY_TRAINING))
    return path


def _read_csv(path):
    with open(path, newline="") as stream:
        rows = [line for line in stream if not line.startswith("#")]
    return list(csv.DictReader(rows))


class TestGenerate:
    def test_default_meta_block(self, tmp_path):
        out = tmp_path / "bench"
        assert main(["generate", "--default", "--output", str(out),
                     "--config", str(_write(tmp_path, TINY_GENERATE))]) == 0
        meta = json.loads((out / "dataset.json").read_text())["meta"]
        assert meta["sigma_T"] == 0.30
        assert meta["sigma_H"] == 1.00
        assert meta["fraction"] == 0.5  # config file overrides the default

    def test_full_default_benchmark_values(self, tmp_path):
        out = tmp_path / "bench"
        assert main(["generate", "--default", "--output", str(out)]) == 0
        doc = json.loads((out / "dataset.json").read_text())
        assert doc["meta"]["fraction"] == 0.25
        assert doc["meta"]["n_obs"] == 1800
        assert len(doc["reference"]["t"]) == 7201
        assert (out / "manifest.json").is_file()

    def test_repeat_runs_are_byte_identical(self, tmp_path):
        cfg = _write(tmp_path, TINY_GENERATE)
        a = tmp_path / "a"
        b = tmp_path / "b"
        assert main(["generate", "--seed", "7", "--config", str(cfg),
                     "--output", str(a)]) == 0
        assert main(["generate", "--seed", "7", "--config", str(cfg),
                     "--output", str(b)]) == 0
        assert (a / "dataset.json").read_bytes() == (b / "dataset.json").read_bytes()

    def test_full_fraction_zero_noise_equals_reference(self, tmp_path):
        cfg = _write(tmp_path, {"grid": TINY_GENERATE["grid"]})
        out = tmp_path / "clean"
        assert main(["generate", "--config", str(cfg), "--fraction", "1.0",
                     "--sigma-T", "0", "--sigma-H", "0",
                     "--output", str(out)]) == 0
        doc = json.loads((out / "dataset.json").read_text())
        assert doc["observations"]["t"] == doc["reference"]["t"]
        assert doc["observations"]["T"] == doc["reference"]["T"]
        assert doc["observations"]["H"] == doc["reference"]["H"]

    def test_invalid_fraction_names_the_field(self, tmp_path, capsys):
        code = main(["generate", "--fraction", "1.5",
                     "--output", str(tmp_path / "x")])
        assert code == 2
        assert "fraction" in capsys.readouterr().err


def _write(tmp_path, payload):
    path = tmp_path / f"cfg_{abs(hash(json.dumps(payload, sort_keys=True)))}.json"
    path.write_text(json.dumps(payload))
    return path


class TestTrain:
    def test_baseline_history_has_zero_physics_columns(self, tiny_dataset,
                                                       train_config, tmp_path):
        out = tmp_path / "run_base"
        assert main(["train", "--dataset", str(tiny_dataset), "--method",
                     "baseline", "--config", str(train_config),
                     "--output", str(out)]) == 0
        rows = _read_csv(out / "loss_history.csv")
        assert all(float(r["l_phys"]) == 0.0 for r in rows)
        assert all(float(r["l_ic"]) == 0.0 for r in rows)
        assert (out / "checkpoint.json").is_file()

    def test_pinn_emits_eight_recovered_coefficients(self, tiny_dataset,
                                                     train_config, tmp_path,
                                                     capsys):
        out = tmp_path / "run_pinn"
        assert main(["train", "--dataset", str(tiny_dataset), "--method", "pinn",
                     "--config", str(train_config), "--output", str(out)]) == 0
        params = json.loads((out / "recovered_params.json").read_text())
        names = {"a1", "a2", "a3", "a4", "b1", "b2", "b3", "b4"}
        assert names <= set(params)
        assert all(params[n] > 0 for n in names)
        assert len(params["phi"]) == 8

    def test_missing_dataset_exits_2_with_message(self, tmp_path, capsys):
        code = main(["train", "--dataset", str(tmp_path / "nope.json"),
                     "--method", "pinn", "--output", str(tmp_path / "o")])
        assert code == 2
        assert "not found" in capsys.readouterr().err

    def test_divergent_data_exits_1_with_iteration(self, tmp_path, train_config,
                                                   capsys):
        # a dataset whose observation magnitudes overflow the squared loss
        from greenhouse_pinn.model import TimeGrid
        from greenhouse_pinn.synthetic import generate_dataset, save_dataset
        import dataclasses
        ds = generate_dataset(seed=1, fraction=0.5, grid=TimeGrid(0.0, 72.0, 1.0))
        obs = dataclasses.replace(ds.observations,
                                  temp_obs=ds.observations.temp_obs + 1e200)
        ds = dataclasses.replace(ds, observations=obs)
        path = tmp_path / "bad.json"
        save_dataset(ds, path)
        code = main(["train", "--dataset", str(path), "--method", "baseline",
                     "--config", str(train_config), "--output", str(tmp_path / "o")])
        assert code == 1
        assert "iteration" in capsys.readouterr().err

    def test_manifest_records_dataset_hash_and_config(self, tiny_dataset,
                                                      train_config, tmp_path):
        out = tmp_path / "run"
        assert main(["train", "--dataset", str(tiny_dataset), "--method",
                     "baseline", "--config", str(train_config), "--seed", "9",
                     "--output", str(out)]) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["resolved_config"]["training"]["seed"] == 9
        assert manifest["inputs"]["dataset"]["sha256"]
        assert manifest["seeds"] == [9]

    def test_repeat_training_runs_are_byte_identical(self, tiny_dataset,
                                                     train_config, tmp_path):
        a = tmp_path / "a"
        b = tmp_path / "b"
        for out in (a, b):
            assert main(["train", "--dataset", str(tiny_dataset), "--method",
                         "pinn", "--config", str(train_config),
                         "--output", str(out)]) == 0
        for name in ("checkpoint.json", "recovered_params.json",
                     "loss_history.csv"):
            assert (a / name).read_bytes() == (b / name).read_bytes(), name


@pytest.fixture()
def trained_runs(tiny_dataset, train_config, tmp_path):
    pinn_dir = tmp_path / "run_pinn"
    base_dir = tmp_path / "run_base"
    assert main(["train", "--dataset", str(tiny_dataset), "--method", "pinn",
                 "--config", str(train_config), "--output", str(pinn_dir)]) == 0
    assert main(["train", "--dataset", str(tiny_dataset), "--method", "baseline",
                 "--config", str(train_config), "--output", str(base_dir)]) == 0
    return pinn_dir, base_dir


class TestEvaluate:
    def test_emits_reports_figures_and_plot_data(self, tiny_dataset,
                                                 trained_runs, tmp_path):
        pinn_dir, base_dir = trained_runs
        out = tmp_path / "eval"
        assert main(["evaluate", "--dataset", str(tiny_dataset),
                     "--pinn-run", str(pinn_dir), "--baseline-run", str(base_dir),
                     "--output", str(out)]) == 0
        for name in ("reconstruction.csv", "forcings.csv", "loss_history.csv",
                     "parameter_recovery.csv", "comparison.json", "comparison.txt",
                     "recovery.json", "recovery.txt", "manifest.json",
                     "reconstruction_temperature.png", "reconstruction_humidity.png",
                     "forcings.png", "loss_history.png", "parameter_recovery.png"):
            assert (out / name).is_file(), name

        rows = _read_csv(out / "reconstruction.csv")
        assert set(rows[0]) == {"t", "reference_T", "reference_H", "pinn_T",
                                "pinn_H", "baseline_T", "baseline_H", "obs_flag"}
        flags = [int(r["obs_flag"]) for r in rows]
        assert set(flags) == {0, 1}

    def test_text_report_uses_four_decimal_columns(self, tiny_dataset,
                                                   trained_runs, tmp_path):
        pinn_dir, base_dir = trained_runs
        out = tmp_path / "eval"
        main(["evaluate", "--dataset", str(tiny_dataset),
              "--pinn-run", str(pinn_dir), "--baseline-run", str(base_dir),
              "--output", str(out)])
        lines = (out / "comparison.txt").read_text().strip().split("\n")
        assert lines[0].split() == ["Method", "RMSE_T", "MAE_T", "R2_T",
                                    "RMSE_H", "MAE_H", "R2_H"]
        assert lines[1].startswith("baseline")
        assert lines[2].startswith("pinn")
        for token in lines[2].split()[1:]:
            whole, frac = token.split(".")
            assert len(frac) == 4

    def test_tampered_dataset_is_refused(self, tiny_dataset, trained_runs,
                                         tmp_path, capsys):
        pinn_dir, base_dir = trained_runs
        doc = json.loads(tiny_dataset.read_text())
        doc["observations"]["T"][0] += 0.5
        tampered = tmp_path / "tampered.json"
        tampered.write_text(json.dumps(doc))
        code = main(["evaluate", "--dataset", str(tampered),
                     "--pinn-run", str(pinn_dir), "--baseline-run", str(base_dir),
                     "--output", str(tmp_path / "eval2")])
        assert code == 2
        assert "different dataset" in capsys.readouterr().err


class TestSweep:
    def test_single_multiplier_sweep(self, tiny_dataset, tmp_path):
        cfg = tmp_path / "sweep.json"
        cfg.write_text(json.dumps({"multipliers": [1.0], "seeds": [0, 1],
                                   "training": TINY_TRAINING}))
        out = tmp_path / "sweep"
        assert main(["sweep", "--dataset", str(tiny_dataset), "--config",
                     str(cfg), "--output", str(out)]) == 0
        rows = _read_csv(out / "sweep.csv")
        # 2 methods x 1 multiplier x 2 seeds, plus 2 median rows
        assert len(rows) == 6
        assert sum(1 for r in rows if r["seed"] == "median") == 2
        assert (out / "sweep.png").is_file()

    def test_multiplier_flag_overrides_config(self, tiny_dataset, tmp_path):
        cfg = tmp_path / "sweep.json"
        cfg.write_text(json.dumps({"multipliers": [1.0, 2.0], "seeds": [0],
                                   "training": TINY_TRAINING}))
        out = tmp_path / "sweep"
        assert main(["sweep", "--dataset", str(tiny_dataset), "--config",
                     str(cfg), "--multipliers", "0,1", "--output", str(out)]) == 0
        rows = _read_csv(out / "sweep.csv")
        assert {r["sigma_mult"] for r in rows} == {"0", "1"}

    def test_completed_cells_survive_and_resume(self, tiny_dataset, tmp_path):
        cfg = tmp_path / "sweep.json"
        cfg.write_text(json.dumps({"multipliers": [1.0], "seeds": [0],
                                   "training": TINY_TRAINING}))
        out = tmp_path / "sweep"
        assert main(["sweep", "--dataset", str(tiny_dataset), "--config",
                     str(cfg), "--output", str(out)]) == 0
        cells = sorted(p.name for p in (out / "cells").iterdir())
        assert cells == ["mult1_seed0_baseline", "mult1_seed0_pinn"]
        pinn_result = out / "cells" / "mult1_seed0_pinn" / "result.json"
        before = pinn_result.read_bytes()
        # wipe one cell; the rerun recomputes only that cell and reuses the rest
        baseline_result = out / "cells" / "mult1_seed0_baseline" / "result.json"
        baseline_result.unlink()
        assert main(["sweep", "--dataset", str(tiny_dataset), "--config",
                     str(cfg), "--output", str(out)]) == 0
        assert pinn_result.read_bytes() == before
        assert baseline_result.is_file()


class TestReproduce:
    def test_tiny_reproduction_pipeline(self, tmp_path, capsys):
        cfg = tmp_path / "repro.json"
        cfg.write_text(json.dumps({
            "seeds": [0, 1],
            "multipliers": [1.0],
            "generate": TINY_GENERATE,
            "training": TINY_TRAINING,
        }))
        out = tmp_path / "repro"
        assert main(["reproduce-paper", "--config", str(cfg),
                     "--output", str(out)]) == 0
        assert (out / "dataset" / "dataset.json").is_file()
        assert (out / "runs" / "seed0" / "pinn" / "checkpoint.json").is_file()
        assert (out / "runs" / "seed1" / "baseline" / "checkpoint.json").is_file()
        assert (out / "evaluation" / "reconstruction.csv").is_file()
        assert (out / "sweep" / "sweep.csv").is_file()
        summary = json.loads((out / "summary.json").read_text())
        assert "checks" in summary and summary["checks"]
        text = (out / "summary.txt").read_text()
        assert "PASS" in text or "FAIL" in text
        # the headline reduction ratios are reported next to the references
        assert "reference 36%" in text
        assert "reference 48%" in text


class TestUsage:
    def test_unknown_command_exits_2(self):
        assert main(["frobnicate"]) == 2

    def test_version_flag(self, capsys):
        assert main(["--version"]) == 0
