"""Heralded noise locations and per-path dephasing event counts."""

from collections.abc import Iterator, Sequence
from dataclasses import dataclass

import numpy as np

from rcslab.circuits.architecture import ArchitectureSpec
from rcslab.core.errors import ValidationError
from rcslab.core.models import HeraldedDephasingSpec
from rcslab.core.seeds import as_generator

# One flag per pair of a layer: True means the gate is replaced by a SWAP.
SwapNetwork = tuple[tuple[bool, ...], ...]


@dataclass(frozen=True)
class NoiseLocationSet:
    """Sites dephased after each layer; ``layers[m - 1]`` belongs to layer m."""

    n: int
    d: int
    layers: tuple[frozenset[int], ...]

    def __post_init__(self) -> None:
        if len(self.layers) != self.d:
            raise ValidationError(f"expected {self.d} noise layers, got {len(self.layers)}")
        for m, sites in enumerate(self.layers, start=1):
            for site in sites:
                if not 0 <= site < self.n:
                    raise ValidationError(f"noise site {site} in layer {m} out of range")

    @classmethod
    def empty(cls, n: int, d: int) -> "NoiseLocationSet":
        return cls(n, d, tuple(frozenset() for _ in range(d)))

    @classmethod
    def full(cls, n: int, d: int) -> "NoiseLocationSet":
        return cls(n, d, tuple(frozenset(range(n)) for _ in range(d)))

    @classmethod
    def from_mask(cls, mask: np.ndarray) -> "NoiseLocationSet":
        """Build from a boolean (d, n) array."""
        d, n = mask.shape
        return cls(n, d, tuple(frozenset(int(s) for s in np.flatnonzero(row)) for row in mask))

    def __contains__(self, location: object) -> bool:
        if not isinstance(location, tuple) or len(location) != 2:
            return False
        site, m = location
        return 1 <= m <= self.d and site in self.layers[m - 1]

    def __iter__(self) -> Iterator[tuple[int, int]]:
        """(site, layer) pairs, layer-major then by site."""
        for m, sites in enumerate(self.layers, start=1):
            for site in sorted(sites):
                yield site, m

    def __len__(self) -> int:
        return sum(len(sites) for sites in self.layers)

    def mask(self) -> np.ndarray:
        """Boolean (d, n) indicator array."""
        out = np.zeros((self.d, self.n), dtype=bool)
        for site, m in self:
            out[m - 1, site] = True
        return out

    def event_counts(
        self,
        swaps: SwapNetwork | None = None,
        pairs: Sequence[Sequence[tuple[int, int]]] | None = None,
    ) -> list[int]:
        """t_i: dephasing events on the path of qubit i.

        With no SWAP network the qubits stay put (identity routing). Otherwise
        ``pairs`` gives each layer's gate pairs and ``swaps`` the matching
        SWAP flags; qubits move with the SWAPs before that layer's noise.
        """
        counts = [0] * self.n
        at_site = list(range(self.n))
        for m, sites in enumerate(self.layers, start=1):
            if swaps is not None:
                if pairs is None:
                    raise ValidationError("a SWAP network needs the layer pairs")
                for (i, j), swapped in zip(pairs[m - 1], swaps[m - 1], strict=True):
                    if swapped:
                        at_site[i], at_site[j] = at_site[j], at_site[i]
            for site in sites:
                counts[at_site[site]] += 1
        return counts


def sample_noise_locations(
    arch: ArchitectureSpec,
    spec: HeraldedDephasingSpec,
    seed: int | np.random.Generator,
) -> NoiseLocationSet:
    """Include each (site, layer) independently with probability p."""
    rng = as_generator(seed)
    mask = rng.random((arch.d, arch.n)) < spec.p
    return NoiseLocationSet.from_mask(mask)


def sample_swap_network(arch: ArchitectureSpec, seed: int | np.random.Generator) -> SwapNetwork:
    """Replace every gate by SWAP or identity with probability 1/2 each."""
    rng = as_generator(seed)
    return tuple(
        tuple(bool(flag) for flag in rng.random(len(layer)) < 0.5) for layer in arch.layers
    )


def path_event_counts(
    arch: ArchitectureSpec, noise: NoiseLocationSet, swaps: SwapNetwork | None = None
) -> list[int]:
    """Per-qubit dephasing event counts for a SWAP realization of ``arch``."""
    if (noise.n, noise.d) != (arch.n, arch.d):
        raise ValidationError("noise locations do not match the architecture")
    return noise.event_counts(swaps, arch.layers)
