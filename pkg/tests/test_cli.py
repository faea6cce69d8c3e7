import json
import os

import pytest

from vtb.cli import main

from conftest import short_env_config


@pytest.fixture
def tiny_env_file(tmp_path):
    """EnvConfig JSON usable with --env (one simulated day)."""
    from vtb.presets import building_path, weather_path

    doc = {
        "building_file": str(building_path("datacenter")),
        "weather_files": [str(weather_path("mixed"))],
        "run_period": [1, 1, 1, 1],
        "substep_s": 900.0,
        "env_name": "cli-test-env",
    }
    path = tmp_path / "env.json"
    path.write_text(json.dumps(doc))
    return path


@pytest.fixture
def year_env_file(tmp_path):
    """Coarse full-year EnvConfig (hourly control) so every month has data."""
    from vtb.presets import building_path, weather_path

    doc = {
        "building_file": str(building_path("datacenter")),
        "weather_files": [str(weather_path("mixed"))],
        "timesteps_per_hour": 1,
        "substep_s": 3600.0,
        "env_name": "cli-year-env",
    }
    path = tmp_path / "year-env.json"
    path.write_text(json.dumps(doc))
    return path


class TestListEnvs:
    def test_catalog_printed(self, capsys):
        assert main(["list-envs"]) == 0
        out = capsys.readouterr().out
        assert "vtb-datacenter-mixed-continuous-stochastic-v1" in out
        lines = [l for l in out.splitlines() if l.strip().startswith("vtb-")]
        assert len(lines) == 24
        assert any("discrete" in l for l in lines)


class TestRun:
    def test_run_writes_progress(self, tmp_path, tiny_env_file, capsys):
        out_dir = tmp_path / "run-out"
        code = main([
            "run", "--env", str(tiny_env_file), "--controller", "rbc",
            "--episodes", "3", "--seed", "7", "--out", str(out_dir),
        ])
        assert code == 0
        progress = (out_dir / "progress.csv").read_text().strip().splitlines()
        assert len(progress) == 4

    def test_rerun_with_overwrite_is_bitwise_identical(self, tmp_path, tiny_env_file):
        out_dir = tmp_path / "rr"
        args = [
            "run", "--env", str(tiny_env_file), "--controller", "static",
            "--episodes", "2", "--seed", "3", "--out", str(out_dir), "--overwrite",
        ]
        assert main(args) == 0
        first = (out_dir / "progress.csv").read_text()
        assert main(args) == 0
        assert (out_dir / "progress.csv").read_text() == first

    def test_unknown_controller_usage_error(self, tmp_path, tiny_env_file, capsys):
        code = main([
            "run", "--env", str(tiny_env_file), "--controller", "wizard",
            "--out", str(tmp_path / "x"),
        ])
        assert code == 1
        err = capsys.readouterr().err
        assert "error:" in err
        assert "usage:" in err

    def test_unknown_preset_usage_error(self, tmp_path, capsys):
        code = main([
            "run", "--env", "vtb-bogus-v1", "--controller", "static",
            "--out", str(tmp_path / "x"),
        ])
        assert code == 1

    def test_existing_out_dir_runtime_error(self, tmp_path, tiny_env_file, capsys):
        out_dir = tmp_path / "dup"
        args = [
            "run", "--env", str(tiny_env_file), "--controller", "static",
            "--out", str(out_dir),
        ]
        assert main(args) == 0
        assert main(args) == 2

    def test_seed_env_var_fallback(self, tmp_path, tiny_env_file, monkeypatch):
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        monkeypatch.setenv("VTB_SEED", "123")
        assert main(["run", "--env", str(tiny_env_file), "--controller", "static",
                     "--out", str(out_a)]) == 0
        monkeypatch.delenv("VTB_SEED")
        assert main(["run", "--env", str(tiny_env_file), "--controller", "static",
                     "--seed", "123", "--out", str(out_b)]) == 0
        assert (out_a / "progress.csv").read_text() == (out_b / "progress.csv").read_text()

    def test_no_command_usage(self, capsys):
        assert main([]) == 1

    def test_ten_episodes_on_named_preset(self, tmp_path):
        # the published-style preset name, end to end through the CLI
        out_dir = tmp_path / "preset-run"
        code = main([
            "run", "--env", "vtb-datacenter-mixed-continuous-stochastic-v1",
            "--controller", "rbc", "--episodes", "10", "--seed", "42",
            "--out", str(out_dir),
        ])
        assert code == 0
        progress = (out_dir / "progress.csv").read_text().strip().splitlines()
        assert len(progress) == 11  # header + one row per episode


class TestImportWeather:
    def test_epw_to_csv(self, tmp_path, capsys):
        from vtb.weather import CAL_DAY, CAL_HOUR, CAL_MONTH, HOURS_PER_YEAR

        epw = tmp_path / "t.epw"
        with epw.open("w") as fh:
            fh.write("LOCATION,Town,ST,USA,TMY3,0,0,0,0,0\n")
            for _ in range(7):
                fh.write("HEADER,0\n")
            for i in range(HOURS_PER_YEAR):
                fields = ["0"] * 35
                fields[1] = str(CAL_MONTH[i])
                fields[2] = str(CAL_DAY[i])
                fields[3] = str(CAL_HOUR[i] + 1)
                fields[6] = "11.5"
                fields[8] = "60.0"
                fields[14] = "0.0"
                fields[15] = "0.0"
                fields[20] = "180.0"
                fields[21] = "2.0"
                fh.write(",".join(fields) + "\n")
        out_csv = tmp_path / "w.csv"
        assert main(["import-weather", "--epw", str(epw), "--out", str(out_csv)]) == 0
        from vtb.weather import parse_weather_csv

        series = parse_weather_csv(out_csv)
        assert series.mean_annual_temp == pytest.approx(11.5)

    def test_missing_epw_is_runtime_error(self, tmp_path):
        assert main([
            "import-weather", "--epw", str(tmp_path / "no.epw"),
            "--out", str(tmp_path / "w.csv"),
        ]) == 2


class TestCompare:
    def test_compare_two_runs(self, tmp_path, year_env_file, capsys):
        ref_dir = tmp_path / "ref"
        cand_dir = tmp_path / "cand"
        main(["run", "--env", str(year_env_file), "--controller", "static",
              "--seed", "1", "--out", str(ref_dir)])
        main(["run", "--env", str(year_env_file), "--controller", "rbc",
              "--seed", "1", "--out", str(cand_dir)])
        out_csv = tmp_path / "cmp.csv"
        code = main(["compare", "--ref", str(ref_dir / "progress.csv"),
                     "--cand", str(cand_dir / "progress.csv"),
                     "--out", str(out_csv)])
        assert code == 0
        lines = out_csv.read_text().strip().splitlines()
        assert len(lines) == 2
        assert lines[0].split(",")[1] == "total_power_savings_pct"

    def test_identical_runs_zero_savings(self, tmp_path, year_env_file):
        ref_dir = tmp_path / "r1"
        cand_dir = tmp_path / "r2"
        for out in (ref_dir, cand_dir):
            main(["run", "--env", str(year_env_file), "--controller", "static",
                  "--seed", "5", "--out", str(out)])
        out_csv = tmp_path / "cmp.csv"
        main(["compare", "--ref", str(ref_dir / "progress.csv"),
              "--cand", str(cand_dir / "progress.csv"), "--out", str(out_csv)])
        row = out_csv.read_text().strip().splitlines()[1].split(",")
        assert float(row[1]) == 0.0


class TestTrainAndSweep:
    def test_train_cem_writes_policy(self, tmp_path, tiny_env_file):
        cem_cfg = tmp_path / "cem.json"
        cem_cfg.write_text(json.dumps({
            "population": 4, "iterations": 2, "elite_frac": 0.5,
            "eval_every": 0, "seed": 1,
            "env": {"timesteps_per_hour": 1, "substep_s": 3600.0},
        }))
        out = tmp_path / "train-out"
        code = main(["train-cem", "--env", str(tiny_env_file),
                     "--config", str(cem_cfg), "--out", str(out)])
        assert code == 0
        assert (out / "policy.json").is_file()
        assert (out / "training_curve.csv").is_file()

    def test_sweep_runs_grid(self, tmp_path, tiny_env_file):
        sweep_cfg = tmp_path / "sweep.json"
        sweep_cfg.write_text(json.dumps({
            "base": {
                "env": str(tiny_env_file),
                "controller": {"kind": "static"},
                "episodes": 1,
                "seed": 3,
            },
            "grids": {
                "controller.heating": [19.0, 20.0],
                "controller.cooling": [23.0, 24.0],
            },
        }))
        out = tmp_path / "sweep-out"
        code = main(["sweep", "--config", str(sweep_cfg), "--parallel", "1",
                     "--out", str(out)])
        assert code == 0
        lines = (out / "sweep_results.csv").read_text().strip().splitlines()
        assert len(lines) == 5
