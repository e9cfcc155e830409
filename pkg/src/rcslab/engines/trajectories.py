"""Statevector Pauli-trajectory estimator for noisy circuits.

Each trajectory replaces every channel by one sampled Pauli, so a single
trajectory's output p^E is an unbiased estimate of the noisy distribution.
Two independent trajectories give E[p^E1_x p^E2_x] = p_x^2, so
sum_x p^E1_x p^E2_x is an unbiased estimate of the collision probability.
"""

import logging
from dataclasses import dataclass

import numpy as np

from rcslab.circuits.realization import CircuitRealization
from rcslab.core.errors import ValidationError
from rcslab.core.seeds import as_generator
from rcslab.engines.dense import (
    PAULI_I,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    apply_operator,
    gate_matrix,
    site_axis,
)

logger = logging.getLogger(__name__)

_PAULIS = (PAULI_I, PAULI_X, PAULI_Y, PAULI_Z)


@dataclass
class Estimate:
    """Monte Carlo mean with its standard error."""

    value: float
    stderr: float
    samples: int


class TrajectorySampler:
    """Samples Pauli trajectories of one circuit realization."""

    def __init__(self, realization: CircuitRealization, seed: int | np.random.Generator):
        realization.check_unitaries()
        self.realization = realization
        self.n = realization.n
        self.rng = as_generator(seed)

    def _apply(self, psi: np.ndarray, u: np.ndarray, sites: tuple[int, ...]) -> np.ndarray:
        return apply_operator(psi, u, [site_axis(self.n, s) for s in sites])

    def run_trajectory(self) -> np.ndarray:
        """Output probabilities of one sampled error realization."""
        n = self.n
        psi = np.zeros((2,) * n, dtype=complex)
        psi[(0,) * n] = 1.0
        circuit = self.realization
        for site, u in enumerate(circuit.leading or ()):
            psi = self._apply(psi, u, (site,))
        for m, ops in enumerate(circuit.gates, start=1):
            for op in ops:
                psi = self._apply(psi, gate_matrix(op), op.sites)
            for site, channel in circuit.layer_channels(m).items():
                weights = (1.0 - channel.q, channel.q_x, channel.q_y, channel.q_z)
                pick = int(self.rng.choice(4, p=np.clip(weights, 0.0, None)))
                if pick:
                    psi = self._apply(psi, _PAULIS[pick], (site,))
        for site, u in enumerate(circuit.readout or ()):
            psi = self._apply(psi, u, (site,))
        probs = np.abs(np.ascontiguousarray(psi).reshape(-1)) ** 2
        return probs / probs.sum()

    def estimate_probabilities(self, trajectories: int) -> tuple[np.ndarray, np.ndarray]:
        """Mean output distribution and per-entry standard error."""
        if trajectories < 2:
            raise ValidationError("need at least two trajectories for a standard error")
        samples = np.array([self.run_trajectory() for _ in range(trajectories)])
        return samples.mean(axis=0), samples.std(axis=0, ddof=1) / np.sqrt(trajectories)

    def estimate_collision(self, pairs: int) -> Estimate:
        """Unbiased collision-probability estimate from independent trajectory pairs."""
        if pairs < 2:
            raise ValidationError("need at least two trajectory pairs for a standard error")
        values = np.array(
            [float(np.dot(self.run_trajectory(), self.run_trajectory())) for _ in range(pairs)]
        )
        return Estimate(
            value=float(values.mean()),
            stderr=float(values.std(ddof=1) / np.sqrt(pairs)),
            samples=pairs,
        )
