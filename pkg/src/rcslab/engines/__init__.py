"""Simulation engines: dense density matrices, stabilizers and the statmech mapping."""

from rcslab.engines.clifford import (
    CliffordElement,
    PauliString,
    StabilizerTableau,
    clifford_table,
    enumerate_two_qubit_cliffords,
    extreme_event_circuit,
    fraction_fixing_z1,
    noiseless_clifford_distribution,
    noisy_clifford_distribution,
    propagate_pauli,
    sample_clifford_circuit,
    verify_noise_monotonicity,
)
from rcslab.engines.dense import (
    DensityState,
    OutputDistribution,
    collision_probability,
    global_haar_distribution,
    marginal_zero_probability,
    output_distribution,
    sample_haar_circuit,
    sample_haar_unitary,
    simulate_noisy_circuit,
    single_qubit_channel_power,
    tvd_to_uniform,
)
from rcslab.engines.statmech import (
    ConfigVector,
    Convention,
    collision_upper_bound,
    exact_average_collision,
    exact_average_collision_over_locations,
    location_averaged,
    modified_ensemble_average,
    modified_ensemble_collision,
)
from rcslab.engines.trajectories import Estimate, TrajectorySampler

__all__ = [
    "CliffordElement",
    "ConfigVector",
    "Convention",
    "DensityState",
    "Estimate",
    "OutputDistribution",
    "PauliString",
    "StabilizerTableau",
    "TrajectorySampler",
    "clifford_table",
    "collision_probability",
    "collision_upper_bound",
    "enumerate_two_qubit_cliffords",
    "exact_average_collision",
    "exact_average_collision_over_locations",
    "extreme_event_circuit",
    "fraction_fixing_z1",
    "global_haar_distribution",
    "location_averaged",
    "marginal_zero_probability",
    "modified_ensemble_average",
    "modified_ensemble_collision",
    "noiseless_clifford_distribution",
    "noisy_clifford_distribution",
    "output_distribution",
    "propagate_pauli",
    "sample_clifford_circuit",
    "sample_haar_circuit",
    "sample_haar_unitary",
    "simulate_noisy_circuit",
    "single_qubit_channel_power",
    "tvd_to_uniform",
    "verify_noise_monotonicity",
]
