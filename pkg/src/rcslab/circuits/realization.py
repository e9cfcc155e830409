"""Concrete sampled circuits shared by the dense and stabilizer engines."""

from dataclasses import dataclass, replace

import numpy as np

from rcslab.circuits.architecture import ArchitectureSpec
from rcslab.circuits.noise import NoiseLocationSet
from rcslab.core.errors import ValidationError
from rcslab.core.models import GateSet, NoiseKind, PauliChannel

UNITARY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class GateOp:
    """A two-qubit gate on ``sites``; ``sites[0]`` is the gate's local qubit 0.

    Exactly one of ``unitary`` (4x4, local qubit 0 the most significant
    tensor factor) or ``clifford_id`` (index into the two-qubit Clifford
    table) is set.
    """

    sites: tuple[int, int]
    unitary: np.ndarray | None = None
    clifford_id: int | None = None

    def __post_init__(self) -> None:
        if (self.unitary is None) == (self.clifford_id is None):
            raise ValidationError("a gate needs exactly one of unitary or clifford_id")
        if self.sites[0] == self.sites[1]:
            raise ValidationError(f"gate sites must differ, got {self.sites}")


def is_unitary(matrix: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    """True when ``matrix`` is square and U^†U = I entrywise within ``tol``."""
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        return False
    eye = np.eye(matrix.shape[0])
    return bool(np.max(np.abs(matrix.conj().T @ matrix - eye)) <= tol)


@dataclass(frozen=True, eq=False)
class CircuitRealization:
    """Gates for every layer of an architecture plus the attached noise.

    ``noise`` is a PauliChannel acting on every site after every layer, or a
    NoiseLocationSet where dephasing with parameter ``dephasing_q`` acts, or
    None. ``leading`` and ``readout`` are optional layers of single-qubit
    gates before layer 1 and after the final noise round.
    """

    architecture: ArchitectureSpec
    gates: tuple[tuple[GateOp, ...], ...]
    noise: PauliChannel | NoiseLocationSet | None = None
    dephasing_q: float = 0.0
    seed: int | None = None
    gate_set: GateSet = GateSet.HAAR
    leading: tuple[np.ndarray, ...] | None = None
    readout: tuple[np.ndarray, ...] | None = None

    def __post_init__(self) -> None:
        arch = self.architecture
        if len(self.gates) != arch.d:
            raise ValidationError(f"expected {arch.d} gate layers, got {len(self.gates)}")
        for m, (ops, pairs) in enumerate(zip(self.gates, arch.layers, strict=True), start=1):
            wanted = {frozenset(p) for p in pairs}
            if len(ops) != len(pairs) or {frozenset(op.sites) for op in ops} != wanted:
                raise ValidationError(f"layer {m} gates do not follow the architecture pairs")
        if isinstance(self.noise, NoiseLocationSet):
            if (self.noise.n, self.noise.d) != (arch.n, arch.d):
                raise ValidationError("noise locations do not match the architecture")
            if not 0.0 <= self.dephasing_q <= 0.5:
                raise ValidationError(f"dephasing q must lie in [0, 1/2], got {self.dephasing_q}")
        for name, layer in (("leading", self.leading), ("readout", self.readout)):
            if layer is not None and len(layer) != arch.n:
                raise ValidationError(f"{name} layer needs {arch.n} single-qubit gates")

    @property
    def n(self) -> int:
        return self.architecture.n

    @property
    def d(self) -> int:
        return self.architecture.d

    @property
    def gate_count(self) -> int:
        return sum(len(ops) for ops in self.gates)

    @property
    def noise_kind(self) -> NoiseKind:
        if self.noise is None:
            return NoiseKind.NONE
        if isinstance(self.noise, PauliChannel):
            return NoiseKind.PAULI
        return NoiseKind.DEPHASING

    @property
    def is_clifford(self) -> bool:
        return all(op.clifford_id is not None for ops in self.gates for op in ops)

    def layer_channels(self, m: int) -> dict[int, PauliChannel]:
        """Site -> channel acting after layer m (1-based)."""
        if isinstance(self.noise, PauliChannel):
            if self.noise.is_identity:
                return {}
            return {site: self.noise for site in range(self.n)}
        if isinstance(self.noise, NoiseLocationSet) and self.dephasing_q > 0.0:
            channel = PauliChannel.dephasing(self.dephasing_q)
            return {site: channel for site in sorted(self.noise.layers[m - 1])}
        return {}

    def noise_locations(self) -> list[tuple[int, int, PauliChannel]]:
        """Every (site, layer, channel) with a non-trivial channel."""
        return [
            (site, m, channel)
            for m in range(1, self.d + 1)
            for site, channel in self.layer_channels(m).items()
        ]

    def without_noise(self) -> "CircuitRealization":
        """Same gates with the noise removed."""
        return replace(self, noise=None, dephasing_q=0.0)

    def with_noise(
        self, noise: PauliChannel | NoiseLocationSet | None, dephasing_q: float = 0.0
    ) -> "CircuitRealization":
        return replace(self, noise=noise, dephasing_q=dephasing_q)

    def check_unitaries(self) -> None:
        """Raise ValidationError on any gate that is not unitary to 1e-12."""
        for m, ops in enumerate(self.gates, start=1):
            for op in ops:
                if op.unitary is not None and (
                    op.unitary.shape != (4, 4) or not is_unitary(op.unitary)
                ):
                    raise ValidationError(f"non-unitary gate on {op.sites} in layer {m}")
        for name, layer in (("leading", self.leading), ("readout", self.readout)):
            for site, u in enumerate(layer or ()):
                if u.shape != (2, 2) or not is_unitary(u):
                    raise ValidationError(f"non-unitary {name} gate on site {site}")
