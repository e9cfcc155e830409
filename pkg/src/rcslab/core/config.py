"""Experiment configuration for rcslab scans."""

import copy
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

import yaml

from rcslab.core.errors import ConfigError, ValidationError
from rcslab.core.models import (
    Ensemble,
    Experiment,
    GateSet,
    HeraldedDephasingSpec,
    LayoutKind,
    NoiseKind,
    PauliChannel,
)

WORKERS_ENV = "RCSLAB_WORKERS"
DENSE_DEFAULT_CAP = 10
DENSE_HARD_CAP = 12
OUTPUT_FORMATS = ("csv", "jsonl", "both")
EXECUTORS = ("thread", "process")

# Keys whose values are grids; a scalar in a config file is promoted to a one-element list.
GRID_KEYS = ("n", "d", "layout", "channels", "p", "q", "alpha", "gate_sets")

DEFAULT_CONFIG: dict[str, Any] = {
    "experiment": Experiment.TVD_SCAN.value,
    "n": [4],
    "d": [1, 2, 3],
    "layout": [LayoutKind.BRICKWORK_1D.value],
    "noise": NoiseKind.PAULI.value,
    "channels": [[0.05, 0.05, 0.05]],
    "p": [1.0],
    "q": [0.25],
    "alpha": [0.5],
    "samples": 200,
    "seed": 1234,
    "workers": None,
    "block_size": 100,
    "out_dir": "results",
    "format": "both",
    "gate_sets": [GateSet.HAAR.value],
    "ensemble": Ensemble.CIRCUIT.value,
    "leading_layer": False,
    "readout_layer": True,
    "compare_noiseless": False,
    "dense_cap": DENSE_DEFAULT_CAP,
    "allow_large_dense": False,
    "statmech_cap": 24,
    "clifford_exact_cap": 2**24,
    "clifford_mc": False,
    "executor": "process",
    "timings": False,
}


def default_workers() -> int:
    """Worker count from the environment, falling back to the CPU count."""
    raw = os.environ.get(WORKERS_ENV)
    if raw:
        try:
            value = int(raw)
        except ValueError as e:
            raise ConfigError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from e
        if value < 1:
            raise ConfigError(f"{WORKERS_ENV} must be >= 1, got {value}")
        return value
    return os.cpu_count() or 1


@dataclass
class ExperimentConfig:
    """A parameter grid plus everything needed to reproduce a scan."""

    experiment: str
    n: list[int]
    d: list[int]
    layout: list[str]
    noise: str
    channels: list[list[float]]
    p: list[float]
    q: list[float]
    alpha: list[float]
    samples: int
    seed: int
    workers: int
    block_size: int
    out_dir: str
    format: str
    gate_sets: list[str]
    ensemble: str
    leading_layer: bool
    readout_layer: bool
    compare_noiseless: bool
    dense_cap: int
    allow_large_dense: bool
    statmech_cap: int
    clifford_exact_cap: int
    clifford_mc: bool
    executor: str
    timings: bool
    source: Path | None = field(default=None, repr=False, compare=False)

    @classmethod
    def load(cls, path: Path) -> "ExperimentConfig":
        """Load configuration from a YAML file."""
        if not path.exists():
            raise FileNotFoundError(f"Config file not found: {path}")
        try:
            with open(path) as f:
                raw = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f"{path}: invalid YAML: {e}") from e
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: expected a key-value mapping at top level")
        config = cls.from_mapping(raw)
        config.source = path
        return config

    @classmethod
    def from_mapping(cls, raw: dict[str, Any]) -> "ExperimentConfig":
        """Merge ``raw`` over the defaults and validate."""
        known = {f.name for f in fields(cls)} - {"source"}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ConfigError(f"Unknown config key(s): {', '.join(unknown)}")
        merged = _merge_defaults(DEFAULT_CONFIG, raw)
        for key in GRID_KEYS:
            merged[key] = _as_list(merged[key])
        if merged["channels"] and not isinstance(merged["channels"][0], list | tuple):
            merged["channels"] = [merged["channels"]]
        if merged["workers"] is None:
            merged["workers"] = default_workers()
        config = cls(**merged)
        config.validate()
        return config

    def with_overrides(self, **overrides: Any) -> "ExperimentConfig":
        """Return a copy with non-None overrides applied (CLI flags)."""
        data = self.to_dict()
        data.update({k: v for k, v in overrides.items() if v is not None})
        config = ExperimentConfig.from_mapping(data)
        config.source = self.source
        return config

    def validate(self) -> None:
        """Check every key; raise ConfigError naming the first bad one."""
        try:
            Experiment(self.experiment)
        except ValueError as e:
            raise ConfigError(f"experiment: unknown kind {self.experiment!r}") from e
        if not self.n or not self.d or not self.layout:
            raise ConfigError("n, d and layout grids must be non-empty")
        for n in self.n:
            if not isinstance(n, int) or n < 2 or n % 2:
                raise ConfigError(f"n: parallel architecture requires even n >= 2, got {n!r}")
        for d in self.d:
            if not isinstance(d, int) or d < 0:
                raise ConfigError(f"d: depth must be a non-negative integer, got {d!r}")
        _check_enum("layout", self.layout, LayoutKind)
        _check_enum("noise", [self.noise], NoiseKind)
        _check_enum("gate_sets", self.gate_sets, GateSet)
        _check_enum("ensemble", [self.ensemble], Ensemble)
        if not self.gate_sets:
            raise ConfigError("gate_sets must be non-empty")
        try:
            for channel in self.channels:
                if len(channel) != 3:
                    raise ConfigError(f"channels: expected [qx, qy, qz], got {channel!r}")
                PauliChannel(*(float(v) for v in channel))
            for p in self.p:
                for q in self.q:
                    HeraldedDephasingSpec(float(p), float(q))
        except ValidationError as e:
            raise ConfigError(f"noise parameters: {e}") from e
        if self.noise == NoiseKind.PAULI.value and not self.channels:
            raise ConfigError("channels must be non-empty for pauli noise")
        for a in self.alpha:
            if not 0.0 <= float(a) <= 1.0:
                raise ConfigError(f"alpha: must lie in [0, 1], got {a!r}")
        if self.samples < 1:
            raise ConfigError(f"samples: must be >= 1, got {self.samples}")
        if self.block_size < 1:
            raise ConfigError(f"block_size: must be >= 1, got {self.block_size}")
        if self.workers < 1:
            raise ConfigError(f"workers: must be >= 1, got {self.workers}")
        if self.format not in OUTPUT_FORMATS:
            raise ConfigError(f"format: expected one of {OUTPUT_FORMATS}, got {self.format!r}")
        if self.executor not in EXECUTORS:
            raise ConfigError(f"executor: expected one of {EXECUTORS}, got {self.executor!r}")
        if self.dense_cap > DENSE_HARD_CAP:
            raise ConfigError(f"dense_cap: hard limit is {DENSE_HARD_CAP}, got {self.dense_cap}")
        if self.dense_cap > DENSE_DEFAULT_CAP and not self.allow_large_dense:
            raise ConfigError(
                f"dense_cap: values above {DENSE_DEFAULT_CAP} require allow_large_dense"
            )
        if self.statmech_cap < 1 or self.clifford_exact_cap < 1:
            raise ConfigError("statmech_cap and clifford_exact_cap must be positive")

    @property
    def pauli_channels(self) -> list[PauliChannel]:
        return [PauliChannel(*(float(v) for v in c)) for c in self.channels]

    def to_dict(self) -> dict[str, Any]:
        """Convert to dictionary (the on-disk key set)."""
        data = asdict(self)
        data.pop("source")
        return data

    def save(self, path: Path) -> None:
        """Save configuration to a YAML file."""
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as f:
            yaml.safe_dump(self.to_dict(), f, default_flow_style=None, sort_keys=False)

    def get(self, key: str, default: Any = None) -> Any:
        """Get a configuration value by key."""
        return self.to_dict().get(key, default)


def _as_list(value: Any) -> list[Any]:
    if isinstance(value, list | tuple):
        return list(value)
    return [value]


def _check_enum(key: str, values: list[str], enum: type[Any]) -> None:
    allowed = [e.value for e in enum]
    for value in values:
        if value not in allowed:
            raise ConfigError(f"{key}: expected one of {allowed}, got {value!r}")


def _merge_defaults(base: dict[str, Any], override: dict[str, Any]) -> dict[str, Any]:
    """Flat merge of ``override`` over a private copy of ``base``."""
    return {**copy.deepcopy(base), **override}
