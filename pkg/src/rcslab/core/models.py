"""Entity dataclasses and enums for rcslab."""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from rcslab.core.errors import ValidationError

PROB_TOL = 1e-12


class LayoutKind(str, Enum):
    """How sites are paired into two-qubit gates in each layer."""

    BRICKWORK_1D = "brickwork1d"
    FIXED_MATCHING = "fixed_matching"
    RANDOM_MATCHING_PER_LAYER = "random_matching_per_layer"


class NoiseKind(str, Enum):
    """Noise model attached to a circuit realization."""

    NONE = "none"
    PAULI = "pauli"
    DEPHASING = "dephasing"


class GateSet(str, Enum):
    """Two-qubit gate ensemble."""

    HAAR = "haar"
    CLIFFORD = "clifford"


class Ensemble(str, Enum):
    """Whether outputs come from layered circuits or one global Haar unitary."""

    CIRCUIT = "circuit"
    GLOBAL = "global"


class Experiment(str, Enum):
    """Experiment kinds, one per CLI scan subcommand."""

    TVD_SCAN = "tvd-scan"
    ANTICONC_SCAN = "anticonc-scan"
    MOMENTS = "moments"
    STATMECH_CHECK = "statmech-check"
    TYPICALITY = "typicality"
    BOUNDS_TABLE = "bounds-table"


class Verdict(str, Enum):
    """Outcome of comparing an estimate against a bound or reference."""

    PASS = "pass"
    FAIL = "fail"  # beyond 3 sigma
    HARD_FAIL = "hard_fail"  # beyond 4 sigma
    VACUOUS = "vacuous"
    INFO = "info"


class BoundSide(str, Enum):
    """Direction of a bound."""

    LOWER = "lower"
    UPPER = "upper"


def _check_probability(name: str, value: float, upper: float = 1.0) -> None:
    if not math.isfinite(value) or value < -PROB_TOL or value > upper + PROB_TOL:
        raise ValidationError(f"{name} must lie in [0, {upper:g}], got {value!r}")


@dataclass(frozen=True)
class PauliChannel:
    """Single-site Pauli channel rho -> (1-q) rho + qx XrhoX + qy YrhoY + qz ZrhoZ."""

    q_x: float
    q_y: float
    q_z: float

    def __post_init__(self) -> None:
        for name, value in (("q_x", self.q_x), ("q_y", self.q_y), ("q_z", self.q_z)):
            _check_probability(name, value)
        _check_probability("q_x + q_y + q_z", self.q)
        if self.b > 0.5 + PROB_TOL:
            raise ValidationError(f"channel has b = {self.b:.6g} > 1/2")

    @property
    def q(self) -> float:
        """Total error probability."""
        return self.q_x + self.q_y + self.q_z

    @property
    def b(self) -> float:
        """Smallest pair sum min(qx+qy, qy+qz, qz+qx)."""
        return min(self.q_x + self.q_y, self.q_y + self.q_z, self.q_z + self.q_x)

    @property
    def is_identity(self) -> bool:
        return self.q == 0.0

    @classmethod
    def depolarizing(cls, q: float) -> "PauliChannel":
        """Equal weight q/3 on each Pauli."""
        return cls(q / 3.0, q / 3.0, q / 3.0)

    @classmethod
    def full_depolarizing(cls) -> "PauliChannel":
        return cls(0.25, 0.25, 0.25)

    @classmethod
    def dephasing(cls, q: float) -> "PauliChannel":
        return cls(0.0, 0.0, q)

    def to_dict(self) -> dict[str, float]:
        return {"qx": self.q_x, "qy": self.q_y, "qz": self.q_z}


@dataclass(frozen=True)
class HeraldedDephasingSpec:
    """Heralded dephasing: each (site, layer) selected with probability p."""

    p: float
    q: float

    def __post_init__(self) -> None:
        _check_probability("p", self.p)
        _check_probability("q", self.q, upper=0.5)

    @property
    def gamma(self) -> float:
        return 8.0 * self.q * (1.0 - self.q) / 3.0

    @property
    def beta(self) -> float:
        return 1.0 - self.gamma

    @property
    def alpha(self) -> float:
        return 4.0 * self.q * (1.0 - self.q) / 3.0

    @property
    def channel(self) -> PauliChannel:
        """The dephasing channel applied at each heralded location."""
        return PauliChannel.dephasing(self.q)


CSV_COLUMNS = (
    "experiment",
    "n",
    "d",
    "layout",
    "qx",
    "qy",
    "qz",
    "p",
    "q",
    "alpha",
    "estimator",
    "value",
    "stderr",
    "samples",
    "seed",
    "bound_name",
    "bound_value",
    "verdict",
)


@dataclass
class ResultRecord:
    """One estimator value for one parameter cell."""

    experiment: str
    n: int
    d: int
    layout: str
    estimator: str
    value: float
    stderr: float = 0.0
    samples: int = 0
    seed: int = 0
    qx: float | None = None
    qy: float | None = None
    qz: float | None = None
    p: float | None = None
    q: float | None = None
    alpha: float | None = None
    bound_name: str | None = None
    bound_value: float | None = None
    verdict: Verdict = Verdict.INFO
    cell_key: str = ""
    engine_version: str = ""
    notes: str = ""
    wall_time: float | None = None
    extra: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not math.isfinite(self.value):
            raise ValidationError(f"{self.estimator}: value must be finite, got {self.value!r}")
        if not self.stderr >= 0.0:
            raise ValidationError(f"{self.estimator}: stderr must be >= 0, got {self.stderr!r}")

    def to_row(self) -> dict[str, Any]:
        """Column values in CSV order."""
        data = self.to_dict()
        return {column: data[column] for column in CSV_COLUMNS}

    def to_dict(self, include_timing: bool = False) -> dict[str, Any]:
        """Convert to dictionary for serialization."""
        data: dict[str, Any] = {
            "experiment": self.experiment,
            "n": self.n,
            "d": self.d,
            "layout": self.layout,
            "qx": self.qx,
            "qy": self.qy,
            "qz": self.qz,
            "p": self.p,
            "q": self.q,
            "alpha": self.alpha,
            "estimator": self.estimator,
            "value": self.value,
            "stderr": self.stderr,
            "samples": self.samples,
            "seed": self.seed,
            "bound_name": self.bound_name,
            "bound_value": self.bound_value,
            "verdict": self.verdict.value,
            "cell_key": self.cell_key,
            "engine_version": self.engine_version,
            "notes": self.notes,
            "extra": self.extra,
        }
        if include_timing:
            data["wall_time"] = self.wall_time
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ResultRecord":
        """Create from dictionary."""
        return cls(
            experiment=data["experiment"],
            n=int(data["n"]),
            d=int(data["d"]),
            layout=data["layout"],
            estimator=data["estimator"],
            value=float(data["value"]),
            stderr=float(data.get("stderr", 0.0)),
            samples=int(data.get("samples", 0)),
            seed=int(data.get("seed", 0)),
            qx=data.get("qx"),
            qy=data.get("qy"),
            qz=data.get("qz"),
            p=data.get("p"),
            q=data.get("q"),
            alpha=data.get("alpha"),
            bound_name=data.get("bound_name"),
            bound_value=data.get("bound_value"),
            verdict=Verdict(data.get("verdict", Verdict.INFO.value)),
            cell_key=data.get("cell_key", ""),
            engine_version=data.get("engine_version", ""),
            notes=data.get("notes", ""),
            wall_time=data.get("wall_time"),
            extra=dict(data.get("extra", {})),
        )
