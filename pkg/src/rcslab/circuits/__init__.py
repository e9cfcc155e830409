"""Circuit architectures, noise locations and sampled realizations."""

from rcslab.circuits.architecture import (
    ArchitectureSpec,
    backward_lightcone,
    build_architecture,
    correlation_neighbourhood,
    forward_lightcone,
    is_perfect_matching,
)
from rcslab.circuits.noise import (
    NoiseLocationSet,
    path_event_counts,
    sample_noise_locations,
    sample_swap_network,
)
from rcslab.circuits.realization import CircuitRealization, GateOp, is_unitary
from rcslab.circuits.serialization import dumps_architecture, loads_architecture

__all__ = [
    "ArchitectureSpec",
    "CircuitRealization",
    "GateOp",
    "NoiseLocationSet",
    "backward_lightcone",
    "build_architecture",
    "correlation_neighbourhood",
    "dumps_architecture",
    "forward_lightcone",
    "is_perfect_matching",
    "is_unitary",
    "loads_architecture",
    "path_event_counts",
    "sample_noise_locations",
    "sample_swap_network",
]
