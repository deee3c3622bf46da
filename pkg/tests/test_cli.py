"""CLI tests: spec parsing, config layering, exit codes, and file outputs."""

from __future__ import annotations

import argparse
from pathlib import Path

import pytest

import defectsim as ds
from defectsim.cli import (
    build_experiment_config,
    main,
    parse_config_file,
    parse_synthetic_spec,
)


class TestParseSyntheticSpec:
    def test_four_part_form(self):
        spec = parse_synthetic_spec("200:0.3:10:1.5")
        assert (spec.n_modules, spec.defect_rate) == (200, 0.3)
        assert (spec.n_features, spec.separation) == (10, 1.5)
        assert spec.seed is None

    def test_five_part_form_pins_seed(self):
        spec = parse_synthetic_spec("50:0.25:4:2.0:99")
        assert spec.seed == 99

    @pytest.mark.parametrize("bad", ["", "200", "200:0.3", "200:0.3:10:1.5:7:8",
                                     "abc:0.3:10:1.5", "200:x:10:1.5"])
    def test_malformed_specs_rejected(self, bad):
        with pytest.raises(ValueError):
            parse_synthetic_spec(bad)


class TestParseConfigFile:
    def test_values_comments_and_repeats(self, tmp_path):
        path = tmp_path / "grid.cfg"
        path.write_text(
            "# comment\n"
            "seed = 7\n"
            "\n"
            "synthetic = 30:0.3:3:1.5\n"
            "synthetic = 40:0.2:4:1.0\n"
            "reps=2\n",
            encoding="utf-8",
        )
        values = parse_config_file(path)
        assert values["seed"] == ["7"]
        assert values["synthetic"] == ["30:0.3:3:1.5", "40:0.2:4:1.0"]
        assert values["reps"] == ["2"]

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("velocity = 9\n", encoding="utf-8")
        with pytest.raises(ValueError, match="velocity"):
            parse_config_file(path)

    def test_missing_equals_rejected(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("seed 7\n", encoding="utf-8")
        with pytest.raises(ValueError, match="line 1"):
            parse_config_file(path)


def make_args(**overrides) -> argparse.Namespace:
    defaults = dict(
        command="run", config=None, dataset=None, synthetic=None, seed=None,
        reps=None, strategies=None, type1=None, type2=None, out=None,
        format=None, trace=False, quiet=True,
    )
    defaults.update(overrides)
    return argparse.Namespace(**defaults)


class TestBuildExperimentConfig:
    def test_defaults_when_nothing_given(self):
        config = build_experiment_config(make_args())
        assert config.repetitions == 40
        assert config.type1_probs == (0.2, 0.4, 0.6, 0.8, 1.0)
        assert config.type2_prob == 0.2
        assert config.master_seed == 123456789

    def test_file_overrides_defaults(self, tmp_path):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("seed = 5\nreps = 3\ntype1 = 0.2,0.6\n", encoding="utf-8")
        config = build_experiment_config(make_args(config=str(cfg)))
        assert config.master_seed == 5
        assert config.repetitions == 3
        assert config.type1_probs == (0.2, 0.6)

    def test_cli_overrides_file(self, tmp_path):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("seed = 5\nreps = 3\n", encoding="utf-8")
        config = build_experiment_config(
            make_args(config=str(cfg), seed=11, reps=2)
        )
        assert config.master_seed == 11
        assert config.repetitions == 2

    def test_cli_datasets_replace_file_datasets(self, tmp_path):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("synthetic = 30:0.3:3:1.5\n", encoding="utf-8")
        config = build_experiment_config(
            make_args(config=str(cfg), synthetic=["50:0.2:4:1.0"])
        )
        assert len(config.datasets) == 1
        assert config.datasets[0].n_modules == 50

    def test_strategies_and_formats_parsed(self):
        config = build_experiment_config(
            make_args(strategies="reference,ordinary", format="md")
        )
        assert config.strategies == ("reference", "ordinary")
        assert config.formats == ("md",)

    def test_trace_flag(self):
        assert build_experiment_config(make_args(trace=True)).dump_traces


class TestMainGenerate:
    def test_writes_loadable_csv(self, tmp_path, capsys):
        out = tmp_path / "data.csv"
        code = main(
            ["generate", "--synthetic", "30:0.3:3:1.5", "--seed", "4",
             "--name", "gen", "--out", str(out)]
        )
        assert code == 0
        assert "30 modules" in capsys.readouterr().out
        data = ds.load_dataset(out)
        assert len(data) == 30
        assert data.feature_names == ("f1", "f2", "f3")

    def test_spec_seed_wins_over_flag(self, tmp_path):
        out_a = tmp_path / "a.csv"
        out_b = tmp_path / "b.csv"
        main(["generate", "--synthetic", "30:0.3:3:1.5:9", "--seed", "1",
              "--out", str(out_a)])
        main(["generate", "--synthetic", "30:0.3:3:1.5:9", "--seed", "2",
              "--out", str(out_b)])
        assert out_a.read_bytes() == out_b.read_bytes()

    def test_bad_spec_exits_2(self, tmp_path, capsys):
        code = main(["generate", "--synthetic", "nope", "--out",
                     str(tmp_path / "x.csv")])
        assert code == 2
        assert "error:" in capsys.readouterr().err


class TestMainRun:
    def test_tiny_grid_end_to_end(self, tmp_path, capsys):
        out = tmp_path / "results"
        code = main(
            ["run", "--synthetic", "30:0.3:3:1.5", "--reps", "2",
             "--type1", "0.2,0.6", "--seed", "3", "--out", str(out), "--quiet"]
        )
        assert code == 0
        printed = capsys.readouterr().out.splitlines()
        expected = {
            "table1_reference.md", "table1_reference.csv",
            "table2_ordinary_vs_reference.md", "table2_ordinary_vs_reference.csv",
            "table3_fixed_vs_ordinary.md", "table3_fixed_vs_ordinary.csv",
            "table4_proposed_vs_ordinary.md", "table4_proposed_vs_ordinary.csv",
            "provenance.txt",
        }
        assert {Path(p).name for p in printed} == expected
        for p in printed:
            assert Path(p).exists()

    def test_trace_flag_dumps_traces(self, tmp_path):
        out = tmp_path / "results"
        code = main(
            ["run", "--synthetic", "30:0.3:3:1.5", "--reps", "1",
             "--type1", "0.2", "--seed", "3", "--out", str(out), "--trace",
             "--quiet"]
        )
        assert code == 0
        traces = list((out / "traces").glob("*.csv"))
        # 1 reference + 3 strategies x 1 probability, 1 repetition
        assert len(traces) == 4

    def test_missing_dataset_exits_1(self, tmp_path, capsys):
        out = tmp_path / "results"
        code = main(
            ["run", "--dataset", str(tmp_path / "absent.csv"),
             "--synthetic", "30:0.3:3:1.5", "--reps", "1", "--type1", "0.2",
             "--seed", "3", "--out", str(out), "--quiet"]
        )
        assert code == 1
        assert "failed" in capsys.readouterr().err

    def test_invalid_probability_exits_2(self, tmp_path, capsys):
        code = main(
            ["run", "--synthetic", "30:0.3:3:1.5", "--type1", "0.1",
             "--out", str(tmp_path), "--quiet"]
        )
        assert code == 2
        assert "error:" in capsys.readouterr().err

    def test_config_file_drives_run(self, tmp_path):
        cfg = tmp_path / "grid.cfg"
        out = tmp_path / "results"
        cfg.write_text(
            "synthetic = 30:0.3:3:1.5\n"
            "reps = 1\n"
            "type1 = 0.2\n"
            "seed = 9\n"
            f"out = {out}\n"
            "format = md\n",
            encoding="utf-8",
        )
        code = main(["run", "--config", str(cfg), "--quiet"])
        assert code == 0
        assert (out / "table1_reference.md").exists()
        assert not (out / "table1_reference.csv").exists()
