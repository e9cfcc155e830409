"""Core modules for rcslab."""

from rcslab.core.config import ExperimentConfig
from rcslab.core.errors import (
    CliffordTypeError,
    ConfigError,
    ConventionMismatchError,
    CorruptedStateError,
    RcsLabError,
    ResourceLimitError,
    ValidationError,
)
from rcslab.core.models import (
    BoundSide,
    Ensemble,
    Experiment,
    GateSet,
    HeraldedDephasingSpec,
    LayoutKind,
    NoiseKind,
    PauliChannel,
    ResultRecord,
    Verdict,
)
from rcslab.core.store import ReportStore, emit_report

__all__ = [
    "BoundSide",
    "CliffordTypeError",
    "ConfigError",
    "ConventionMismatchError",
    "CorruptedStateError",
    "Ensemble",
    "Experiment",
    "ExperimentConfig",
    "GateSet",
    "HeraldedDephasingSpec",
    "LayoutKind",
    "NoiseKind",
    "PauliChannel",
    "RcsLabError",
    "ReportStore",
    "ResourceLimitError",
    "ResultRecord",
    "ValidationError",
    "Verdict",
    "emit_report",
]
