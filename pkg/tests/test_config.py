"""Tests for experiment configuration."""

import pytest
import yaml

from rcslab.core.config import (
    DEFAULT_CONFIG,
    WORKERS_ENV,
    ExperimentConfig,
    _merge_defaults,
    default_workers,
)
from rcslab.core.errors import ConfigError


class TestMergeDefaults:
    """Tests for _merge_defaults function."""

    def test_override_wins(self):
        """Test keys in the override replace the defaults."""
        base = {"a": 1, "b": 2}
        override = {"b": 3, "c": 4}
        assert _merge_defaults(base, override) == {"a": 1, "b": 3, "c": 4}

    def test_base_is_not_mutated(self):
        base = {"a": 1}
        _merge_defaults(base, {"a": 2})
        assert base == {"a": 1}

    def test_default_lists_are_copied(self):
        """Test merged configs never share list objects with DEFAULT_CONFIG."""
        merged = _merge_defaults(DEFAULT_CONFIG, {})
        merged["alpha"].append(0.99)
        assert 0.99 not in DEFAULT_CONFIG["alpha"]
        config = ExperimentConfig.from_mapping({})
        config.n.append(64)
        assert 64 not in DEFAULT_CONFIG["n"]


class TestDefaultWorkers:
    """Tests for the worker-count environment variable."""

    def test_reads_environment(self, monkeypatch):
        monkeypatch.setenv(WORKERS_ENV, "3")
        assert default_workers() == 3

    def test_rejects_garbage(self, monkeypatch):
        monkeypatch.setenv(WORKERS_ENV, "many")
        with pytest.raises(ConfigError):
            default_workers()

    def test_falls_back_to_cpu_count(self, monkeypatch):
        monkeypatch.delenv(WORKERS_ENV, raising=False)
        assert default_workers() >= 1


class TestExperimentConfig:
    """Tests for ExperimentConfig."""

    def test_defaults(self, monkeypatch):
        """Test an empty mapping yields the defaults."""
        monkeypatch.setenv(WORKERS_ENV, "2")
        config = ExperimentConfig.from_mapping({})
        assert config.experiment == DEFAULT_CONFIG["experiment"]
        assert config.n == DEFAULT_CONFIG["n"]
        assert config.workers == 2
        assert config.readout_layer is True

    def test_scalars_promoted_to_grids(self):
        """Test scalar grid values become one-element lists."""
        config = ExperimentConfig.from_mapping(
            {"n": 6, "d": 2, "layout": "fixed_matching", "p": 0.5, "workers": 1}
        )
        assert config.n == [6]
        assert config.d == [2]
        assert config.layout == ["fixed_matching"]
        assert config.p == [0.5]

    def test_single_channel_promoted(self):
        config = ExperimentConfig.from_mapping({"channels": [0.1, 0.0, 0.0], "workers": 1})
        assert config.channels == [[0.1, 0.0, 0.0]]
        assert config.pauli_channels[0].q_x == 0.1

    def test_unknown_key_rejected(self):
        """Test unknown keys raise ConfigError naming them."""
        with pytest.raises(ConfigError, match="bogus"):
            ExperimentConfig.from_mapping({"bogus": 1})

    @pytest.mark.parametrize(
        "raw, key",
        [
            ({"n": [3]}, "n"),
            ({"d": [-1]}, "d"),
            ({"layout": ["ring"]}, "layout"),
            ({"noise": "amplitude"}, "noise"),
            ({"samples": 0}, "samples"),
            ({"alpha": [1.5]}, "alpha"),
            ({"format": "xml"}, "format"),
            ({"executor": "gpu"}, "executor"),
            ({"experiment": "nope"}, "experiment"),
            ({"dense_cap": 13}, "dense_cap"),
            ({"dense_cap": 11}, "allow_large_dense"),
        ],
    )
    def test_invalid_values(self, raw, key):
        """Test validation names the offending key."""
        with pytest.raises(ConfigError, match=key):
            ExperimentConfig.from_mapping({"workers": 1, **raw})

    def test_invalid_channel(self):
        with pytest.raises(ConfigError, match="noise parameters"):
            ExperimentConfig.from_mapping({"channels": [[0.6, 0.6, 0.0]], "workers": 1})

    def test_invalid_dephasing_strength(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_mapping({"q": [0.75], "workers": 1})

    def test_large_dense_cap_with_flag(self):
        config = ExperimentConfig.from_mapping(
            {"dense_cap": 12, "allow_large_dense": True, "workers": 1}
        )
        assert config.dense_cap == 12

    def test_with_overrides_ignores_none(self):
        """Test CLI overrides skip flags that were not given."""
        config = ExperimentConfig.from_mapping({"samples": 10, "workers": 1})
        updated = config.with_overrides(samples=None, seed=7)
        assert updated.samples == 10
        assert updated.seed == 7

    def test_save_and_load(self, temp_dir):
        """Test a saved config loads back identically."""
        config = ExperimentConfig.from_mapping({"n": [2, 4], "seed": 5, "workers": 1})
        path = temp_dir / "sub" / "config.yaml"
        config.save(path)

        loaded = ExperimentConfig.load(path)
        assert loaded.to_dict() == config.to_dict()
        assert loaded.source == path

    def test_load_yaml_file(self, temp_dir):
        path = temp_dir / "scan.yaml"
        path.write_text(yaml.safe_dump({"experiment": "moments", "n": 4, "workers": 1}))
        config = ExperimentConfig.load(path)
        assert config.experiment == "moments"
        assert config.n == [4]

    def test_load_missing_file(self, temp_dir):
        """Test loading a missing file raises FileNotFoundError."""
        with pytest.raises(FileNotFoundError):
            ExperimentConfig.load(temp_dir / "missing.yaml")

    def test_load_non_mapping(self, temp_dir):
        path = temp_dir / "list.yaml"
        path.write_text("- 1\n- 2\n")
        with pytest.raises(ConfigError):
            ExperimentConfig.load(path)

    def test_get(self):
        config = ExperimentConfig.from_mapping({"workers": 1})
        assert config.get("samples") == DEFAULT_CONFIG["samples"]
        assert config.get("missing", "fallback") == "fallback"
