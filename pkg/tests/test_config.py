"""Config parsing, validation diagnostics, and YAML round trips."""

import os

import pytest
import yaml

from tnvd import (ConfigError, config_from_dict, config_to_dict,
                  default_config_yaml, default_run_config, load_config,
                  save_config)
from tnvd.config import resolve_output_dir


def _tree(**overrides):
    tree = config_to_dict(default_run_config())
    for path, value in overrides.items():
        section, key = path.split(".")
        tree[section][key] = value
    return tree


def test_default_yaml_round_trips_to_default_config():
    tree = yaml.safe_load(default_config_yaml())
    assert config_from_dict(tree) == default_run_config()


def test_save_load_round_trip(tmp_path):
    cfg = config_from_dict(_tree(**{
        "model.n_sites": 6, "model.h": 0.25, "model.disorder_w": 2.0,
        "ansatz.chi_a": 4, "train.max_steps": 7, "train.alternating": True,
        "experiment.kind": "dos-study", "sampling.n_samples": 5000,
        "output.name": "roundtrip"}))
    path = tmp_path / "cfg.yaml"
    save_config(cfg, path)
    assert load_config(path) == cfg


def test_yaml_syntax_error_reports_line(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("model:\n  n_sites: [4\n")
    with pytest.raises(ConfigError) as err:
        load_config(path)
    assert "line" in str(err.value)


def test_unknown_sections_and_fields_named_by_path():
    tree = _tree()
    tree["bogus"] = {"x": 1}
    tree["model"]["typo_field"] = 3
    with pytest.raises(ConfigError) as err:
        config_from_dict(tree)
    msg = str(err.value)
    assert "bogus: unknown section" in msg
    assert "model.typo_field: unknown field" in msg


def test_bad_types_named_by_path():
    tree = _tree(**{"model.n_sites": "six"})
    with pytest.raises(ConfigError) as err:
        config_from_dict(tree)
    assert "model.n_sites" in str(err.value)


def test_epsilon_rejected_beyond_dense_limit():
    tree = _tree(**{"model.n_sites": 20, "experiment.epsilon": True})
    with pytest.raises(ConfigError) as err:
        config_from_dict(tree)
    assert "experiment.epsilon" in str(err.value)
    # the same size is fine once the exact comparison is turned off
    tree["experiment"]["epsilon"] = False
    tree["experiment"]["ee_deviation"] = False
    assert config_from_dict(tree).model.n_sites == 20


def test_sweep_validation_rules():
    with pytest.raises(ConfigError, match="sweep_axis"):
        config_from_dict(_tree(**{"experiment.kind": "sweep",
                                  "experiment.sweep_values": [2, 4]}))
    with pytest.raises(ConfigError, match="sweep_values: empty"):
        config_from_dict(_tree(**{"experiment.kind": "sweep",
                                  "experiment.sweep_axis": "chi_a"}))
    with pytest.raises(ConfigError, match="invalid for axis N"):
        config_from_dict(_tree(**{"experiment.kind": "sweep",
                                  "experiment.sweep_axis": "N",
                                  "experiment.sweep_values": [4, 6.5]}))
    with pytest.raises(ConfigError, match=">= 0"):
        config_from_dict(_tree(**{"experiment.kind": "sweep",
                                  "experiment.sweep_axis": "W",
                                  "experiment.sweep_values": [-1.0]}))


def test_disorder_scan_needs_disorder_and_realizations():
    with pytest.raises(ConfigError, match="disorder_w"):
        config_from_dict(_tree(**{"experiment.kind": "disorder-scan"}))
    with pytest.raises(ConfigError, match="n_realizations"):
        config_from_dict(_tree(**{"experiment.kind": "disorder-scan",
                                  "model.disorder_w": 1.0,
                                  "experiment.n_realizations": 0}))


def test_every_problem_collected_not_just_first():
    tree = _tree(**{"ansatz.n_layers": 0, "output.workers": 0,
                    "sampling.n_samples": -1})
    with pytest.raises(ConfigError) as err:
        config_from_dict(tree)
    assert len(err.value.problems) == 3


def test_resolve_output_dir_uses_env_root_and_avoids_clash(tmp_path, monkeypatch):
    monkeypatch.setenv("TNVD_OUTPUT_ROOT", str(tmp_path))
    cfg = default_run_config()
    first = resolve_output_dir(cfg)
    assert first == str(tmp_path / "single-N8")
    os.makedirs(first)
    assert resolve_output_dir(cfg) == str(tmp_path / "single-N8-1")


def test_explicit_output_dir_wins(tmp_path, monkeypatch):
    monkeypatch.setenv("TNVD_OUTPUT_ROOT", str(tmp_path))
    tree = _tree(**{"output.dir": "/elsewhere/run"})
    assert resolve_output_dir(config_from_dict(tree)) == "/elsewhere/run"
