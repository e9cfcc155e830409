"""Parallel circuit architectures and their lightcones."""

from collections.abc import Iterable
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from rcslab.core.errors import ValidationError
from rcslab.core.models import LayoutKind
from rcslab.core.seeds import as_generator

Pair = tuple[int, int]
Layer = tuple[Pair, ...]


@dataclass(frozen=True)
class ArchitectureSpec:
    """n sites, d layers, every layer a perfect matching of the sites.

    Layers are numbered 1..d in the public API; ``layers[m - 1]`` is layer m.
    """

    n: int
    d: int
    layers: tuple[Layer, ...]
    layout_kind: LayoutKind
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.n < 2 or self.n % 2:
            raise ValidationError("parallel architecture requires even n")
        if self.d < 0:
            raise ValidationError(f"depth must be >= 0, got {self.d}")
        if len(self.layers) != self.d:
            raise ValidationError(f"expected {self.d} layers, got {len(self.layers)}")
        for m, layer in enumerate(self.layers, start=1):
            if not is_perfect_matching(layer, self.n):
                raise ValidationError(f"layer {m} is not a perfect matching of {self.n} sites")

    @cached_property
    def partners(self) -> tuple[tuple[int, ...], ...]:
        """``partners[m - 1][i]`` is the site gated with i in layer m."""
        table = []
        for layer in self.layers:
            row = [0] * self.n
            for i, j in layer:
                row[i] = j
                row[j] = i
            table.append(tuple(row))
        return tuple(table)

    def layer(self, m: int) -> Layer:
        """Pairs of layer m (1-based)."""
        self._check_layer(m)
        return self.layers[m - 1]

    def neighbours(self, m: int, sites: Iterable[int]) -> set[int]:
        """n_m(A): the sites together with their layer-m partners."""
        self._check_layer(m)
        row = self.partners[m - 1]
        out: set[int] = set()
        for i in sites:
            out.add(i)
            out.add(row[i])
        return out

    def _check_layer(self, m: int) -> None:
        if not 1 <= m <= self.d:
            raise ValidationError(f"layer {m} out of range 1..{self.d}")


def is_perfect_matching(layer: Iterable[Pair], n: int) -> bool:
    """True when every site 0..n-1 appears in exactly one pair."""
    seen: list[int] = []
    for pair in layer:
        if len(pair) != 2 or pair[0] == pair[1]:
            return False
        seen.extend(pair)
    return sorted(seen) == list(range(n))


def _brickwork_layer(n: int, m: int) -> Layer:
    if n == 2 or m % 2 == 1:
        return tuple((i, i + 1) for i in range(0, n, 2))
    return tuple((i, (i + 1) % n) for i in range(1, n, 2))


def _random_matching(n: int, rng: np.random.Generator) -> Layer:
    order = rng.permutation(n)
    pairs = sorted(
        (int(min(order[k], order[k + 1])), int(max(order[k], order[k + 1])))
        for k in range(0, n, 2)
    )
    return tuple(pairs)


def build_architecture(
    n: int,
    d: int,
    layout_kind: LayoutKind | str = LayoutKind.BRICKWORK_1D,
    seed: int | np.random.Generator | None = None,
) -> ArchitectureSpec:
    """Construct a parallel architecture.

    brickwork1d alternates (0,1)(2,3)... with (1,2)(3,4)...(n-1,0);
    fixed_matching repeats one uniform matching drawn from the seed;
    random_matching_per_layer draws a fresh uniform matching per layer.
    """
    kind = LayoutKind(layout_kind)
    if n < 2 or n % 2:
        raise ValidationError("parallel architecture requires even n")
    if d < 0:
        raise ValidationError(f"depth must be >= 0, got {d}")
    recorded = seed if isinstance(seed, int) else None
    if kind is LayoutKind.BRICKWORK_1D:
        layers = tuple(_brickwork_layer(n, m) for m in range(1, d + 1))
    else:
        rng = as_generator(0 if seed is None else seed)
        if kind is LayoutKind.FIXED_MATCHING:
            matching = _random_matching(n, rng)
            layers = tuple(matching for _ in range(d))
        else:
            layers = tuple(_random_matching(n, rng) for _ in range(d))
    return ArchitectureSpec(n=n, d=d, layers=layers, layout_kind=kind, seed=recorded)


def _check_cone_args(arch: ArchitectureSpec, site: int, k: int) -> None:
    if not 0 <= site < arch.n:
        raise ValidationError(f"site {site} out of range 0..{arch.n - 1}")
    if not 0 <= k <= arch.d:
        raise ValidationError(f"lightcone depth {k} out of range 0..{arch.d}")


def forward_lightcone(arch: ArchitectureSpec, site: int, k: int) -> set[int]:
    """L_k(i) = n_k ∘ ... ∘ n_1 (i)."""
    _check_cone_args(arch, site, k)
    cone = {site}
    for m in range(1, k + 1):
        cone = arch.neighbours(m, cone)
    return cone


def backward_lightcone(arch: ArchitectureSpec, site: int, k: int) -> set[int]:
    """L_k†(i) = n_1 ∘ ... ∘ n_k (i)."""
    _check_cone_args(arch, site, k)
    cone = {site}
    for m in range(k, 0, -1):
        cone = arch.neighbours(m, cone)
    return cone


def correlation_neighbourhood(arch: ArchitectureSpec, site: int, k: int | None = None) -> set[int]:
    """Sites whose depth-k backward lightcone meets that of ``site``.

    Outputs at sites outside this set depend on disjoint sets of gates, so
    their marginals are independent over the gate ensemble.
    """
    k = arch.d if k is None else k
    cone = backward_lightcone(arch, site, k)
    for m in range(1, k + 1):
        cone = arch.neighbours(m, cone)
    return cone
