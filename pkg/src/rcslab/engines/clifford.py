"""Stabilizer engine: two-qubit Clifford table, tableaus, noisy Clifford circuits.

Pauli operators are ``i^phase X^x Z^z`` with ``x`` and ``z`` bitmasks (bit k
acts on site k, and X^x stands left of Z^z). A two-qubit Clifford is stored
as its conjugation images of X0, Z0, X1, Z1, where local qubit 0 is the
gate's first site and the most significant factor of its 4x4 unitary.
"""

import logging
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from rcslab.circuits.architecture import ArchitectureSpec
from rcslab.circuits.noise import NoiseLocationSet, sample_noise_locations
from rcslab.circuits.realization import CircuitRealization, GateOp
from rcslab.core.errors import CliffordTypeError, ResourceLimitError, ValidationError
from rcslab.core.models import GateSet, HeraldedDephasingSpec, PauliChannel
from rcslab.core.seeds import as_generator
from rcslab.engines.dense import OutputDistribution, collision_probability
from rcslab.engines.trajectories import Estimate

logger = logging.getLogger(__name__)

CLIFFORD_GROUP_ORDER = 11520
DEFAULT_EXACT_CAP = 2**24
MAX_TABLEAU_VECTOR_QUBITS = 24
MONOTONICITY_TOL = 1e-10


def popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True)
class PauliString:
    """i^phase X^x Z^z."""

    x: int
    z: int
    phase: int = 0

    def __mul__(self, other: "PauliString") -> "PauliString":
        phase = self.phase + other.phase + 2 * popcount(self.z & other.x)
        return PauliString(self.x ^ other.x, self.z ^ other.z, phase % 4)

    def commutes(self, other: "PauliString") -> bool:
        return (popcount(self.x & other.z) + popcount(self.z & other.x)) % 2 == 0

    @property
    def is_hermitian(self) -> bool:
        return (self.phase - popcount(self.x & self.z)) % 2 == 0

    @property
    def sign_power(self) -> int:
        """t with operator = i^t times a tensor product of I, X, Y, Z."""
        return (self.phase - popcount(self.x & self.z)) % 4

    def negated(self) -> "PauliString":
        return PauliString(self.x, self.z, (self.phase + 2) % 4)

    def label(self, n: int) -> str:
        """Signed label with site 0 first, e.g. ``-XIZ``."""
        sign = {0: "+", 1: "+i", 2: "-", 3: "-i"}[self.sign_power]
        chars = []
        for k in range(n):
            bits = ((self.x >> k) & 1, (self.z >> k) & 1)
            chars.append({(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}[bits])
        return sign + "".join(chars)

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Inverse of :meth:`label` (an unsigned label means +)."""
        sign = 0
        for prefix, power in (("+i", 1), ("-i", 3), ("+", 0), ("-", 2)):
            if label.startswith(prefix):
                sign, label = power, label[len(prefix) :]
                break
        x = z = 0
        ys = 0
        for k, ch in enumerate(label):
            if ch in "XY":
                x |= 1 << k
            if ch in "ZY":
                z |= 1 << k
            if ch == "Y":
                ys += 1
            elif ch not in "IXZ":
                raise ValidationError(f"bad Pauli label character {ch!r}")
        return cls(x, z, (sign + ys) % 4)


_X0, _Z0, _X1, _Z1 = PauliString(1, 0), PauliString(0, 1), PauliString(2, 0), PauliString(0, 2)


@dataclass(frozen=True)
class CliffordElement:
    """Conjugation images of (X0, Z0, X1, Z1)."""

    images: tuple[PauliString, PauliString, PauliString, PauliString]

    def conjugate(self, p: PauliString) -> PauliString:
        """C p C^† for a two-qubit Pauli p."""
        result = PauliString(0, 0, p.phase)
        x_img, z_img = (self.images[0], self.images[2]), (self.images[1], self.images[3])
        for k in range(2):
            if (p.x >> k) & 1:
                result = result * x_img[k]
        for k in range(2):
            if (p.z >> k) & 1:
                result = result * z_img[k]
        return result

    def then(self, other: "CliffordElement") -> "CliffordElement":
        """The element applying ``self`` first and ``other`` second."""
        x0, z0, x1, z1 = (other.conjugate(img) for img in self.images)
        return CliffordElement((x0, z0, x1, z1))

    def is_symplectic(self) -> bool:
        """Images are Hermitian with the commutation pattern of X0, Z0, X1, Z1."""
        gens = (_X0, _Z0, _X1, _Z1)
        if not all(img.is_hermitian for img in self.images):
            return False
        for a in range(4):
            for b in range(a + 1, 4):
                if gens[a].commutes(gens[b]) != self.images[a].commutes(self.images[b]):
                    return False
        return True

    def fixes_z0(self) -> bool:
        """C Z0 C^† = +Z0 exactly."""
        return self.images[1] == _Z0


IDENTITY = CliffordElement((_X0, _Z0, _X1, _Z1))

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_S = np.array([[1, 0], [0, 1j]], dtype=complex)
_I2 = np.eye(2, dtype=complex)
_Y0 = PauliString(1, 1, 1)
_Y1 = PauliString(2, 2, 1)

GENERATORS: tuple[tuple[str, CliffordElement, np.ndarray], ...] = (
    ("H0", CliffordElement((_Z0, _X0, _X1, _Z1)), np.kron(_H, _I2)),
    ("S0", CliffordElement((_Y0, _Z0, _X1, _Z1)), np.kron(_S, _I2)),
    ("H1", CliffordElement((_X0, _Z0, _Z1, _X1)), np.kron(_I2, _H)),
    ("S1", CliffordElement((_X0, _Z0, _Y1, _Z1)), np.kron(_I2, _S)),
    (
        "CNOT",
        CliffordElement((PauliString(3, 0), _Z0, _X1, PauliString(0, 3))),
        np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    ),
)


@dataclass(frozen=True)
class CliffordTable:
    """The enumerated group: elements, unitaries and a reverse index."""

    elements: tuple[CliffordElement, ...]
    unitaries: np.ndarray
    index: dict[CliffordElement, int]


@lru_cache(maxsize=1)
def clifford_table() -> CliffordTable:
    """Close the generating set under composition (breadth first).

    Images carry signs, so distinct keys are distinct elements modulo global
    phase; ids follow discovery order and are stable.
    """
    elements = [IDENTITY]
    unitaries = [np.eye(4, dtype=complex)]
    index = {IDENTITY: 0}
    queue = deque([0])
    while queue:
        k = queue.popleft()
        for _, gen, gen_u in GENERATORS:
            candidate = elements[k].then(gen)
            if candidate not in index:
                index[candidate] = len(elements)
                elements.append(candidate)
                unitaries.append(gen_u @ unitaries[k])
                queue.append(index[candidate])
    if len(elements) != CLIFFORD_GROUP_ORDER:
        raise RuntimeError(f"Clifford closure produced {len(elements)} elements")
    logger.debug("Enumerated %d two-qubit Clifford elements", len(elements))
    return CliffordTable(tuple(elements), np.array(unitaries), index)


def enumerate_two_qubit_cliffords() -> list[CliffordElement]:
    """All 11520 two-qubit Cliffords modulo global phase."""
    return list(clifford_table().elements)


def clifford_unitary(clifford_id: int) -> np.ndarray:
    """4x4 unitary (up to global phase) of a table element."""
    return clifford_table().unitaries[clifford_id]


def clifford_id(element: CliffordElement) -> int:
    return clifford_table().index[element]


@lru_cache(maxsize=1)
def z1_fixing_ids() -> tuple[int, ...]:
    """Ids of elements with C Z0 C^† = +Z0."""
    return tuple(i for i, e in enumerate(clifford_table().elements) if e.fixes_z0())


def fraction_fixing_z1() -> Fraction:
    """Exact fraction of the group fixing +Z on the first qubit."""
    fraction = Fraction(len(z1_fixing_ids()), CLIFFORD_GROUP_ORDER)
    if fraction < Fraction(1, 30):
        raise RuntimeError(f"Z-fixing fraction {fraction} is below 1/30")
    return fraction


def hadamard_pair_id() -> int:
    """Id of H ⊗ H."""
    return clifford_id(GENERATORS[0][1].then(GENERATORS[2][1]))


@lru_cache(maxsize=None)
def _local_action(cid: int) -> tuple[tuple[int, int, int], ...]:
    """Image (x, z, phase) of each of the 16 local X^x Z^z, indexed x | z << 2."""
    element = clifford_table().elements[cid]
    table = []
    for key in range(16):
        img = element.conjugate(PauliString(key & 3, key >> 2))
        table.append((img.x, img.z, img.phase))
    return tuple(table)


def conjugate_on_sites(p: PauliString, cid: int, sites: tuple[int, int]) -> PauliString:
    """C p C^† for an n-qubit Pauli, the Clifford acting on ``sites``."""
    i, j = sites
    mask = (1 << i) | (1 << j)
    lx = ((p.x >> i) & 1) | (((p.x >> j) & 1) << 1)
    lz = ((p.z >> i) & 1) | (((p.z >> j) & 1) << 1)
    ix, iz, iphase = _local_action(cid)[lx | (lz << 2)]
    x = (p.x & ~mask) | ((ix & 1) << i) | (((ix >> 1) & 1) << j)
    z = (p.z & ~mask) | ((iz & 1) << i) | (((iz >> 1) & 1) << j)
    return PauliString(x, z, (p.phase + iphase) % 4)


def _require_clifford(circuit: CircuitRealization) -> None:
    if not circuit.is_clifford:
        raise CliffordTypeError("circuit contains non-Clifford gates")
    if circuit.leading is not None or circuit.readout is not None:
        raise CliffordTypeError("single-qubit Haar layers are not Clifford")


def propagate_pauli(circuit: CircuitRealization, p: PauliString, after_layer: int) -> PauliString:
    """Conjugate ``p`` through layers after_layer+1 .. d."""
    for ops in circuit.gates[after_layer:]:
        for op in ops:
            assert op.clifford_id is not None
            p = conjugate_on_sites(p, op.clifford_id, op.sites)
    return p


class StabilizerTableau:
    """n commuting, independent stabilizer generators stored as packed bit rows."""

    def __init__(self, n: int, generators: list[PauliString]):
        self.n = n
        self.generators = list(generators)

    @classmethod
    def zero_state(cls, n: int) -> "StabilizerTableau":
        """|0^n>, stabilized by Z_0 .. Z_{n-1}."""
        return cls(n, [PauliString(0, 1 << k) for k in range(n)])

    def copy(self) -> "StabilizerTableau":
        return StabilizerTableau(self.n, list(self.generators))

    def apply_clifford(self, cid: int, sites: tuple[int, int]) -> None:
        self.generators = [conjugate_on_sites(g, cid, sites) for g in self.generators]

    def apply_pauli(self, p: PauliString) -> None:
        """Conjugating by a Pauli flips the signs of anticommuting generators."""
        self.generators = [g if g.commutes(p) else g.negated() for g in self.generators]

    def validate(self) -> None:
        """Raise ValidationError unless the generators define a unique state."""
        gens = self.generators
        if len(gens) != self.n:
            raise ValidationError(f"expected {self.n} generators, got {len(gens)}")
        for a, g in enumerate(gens):
            if not g.is_hermitian or g.sign_power not in (0, 2):
                raise ValidationError(f"generator {a} is not a signed Hermitian Pauli")
            for h in gens[a + 1 :]:
                if not g.commutes(h):
                    raise ValidationError("stabilizer generators do not commute")
        if _gf2_rank([(g.x << self.n) | g.z for g in gens]) != self.n:
            raise ValidationError("stabilizer generators are not independent")

    def support(self) -> tuple[int, list[int]]:
        """Measurement support as an affine space ``offset + span(basis)``.

        Gaussian elimination on the X parts splits the group into k rows with
        independent X parts (spanning the support directions) and n - k
        Z-type rows whose signs fix the offset.
        """
        rows = list(self.generators)
        rank = 0
        for col in range(self.n):
            pivot = next((r for r in range(rank, len(rows)) if (rows[r].x >> col) & 1), None)
            if pivot is None:
                continue
            rows[rank], rows[pivot] = rows[pivot], rows[rank]
            for r in range(len(rows)):
                if r != rank and (rows[r].x >> col) & 1:
                    rows[r] = rows[r] * rows[rank]
            rank += 1
        basis = [row.x for row in rows[:rank]]
        constraints = []
        for row in rows[rank:]:
            if row.phase not in (0, 2):
                raise ValidationError("Z-type stabilizer with imaginary sign")
            constraints.append((row.z, row.phase // 2))
        return _solve_gf2(constraints, self.n), basis

    def nonzero_probability(self) -> float:
        """Common value 2^-k of every nonzero outcome probability."""
        _, basis = self.support()
        return 2.0 ** -len(basis)

    def probabilities(self) -> np.ndarray:
        """Dense probability vector (n <= 24)."""
        if self.n > MAX_TABLEAU_VECTOR_QUBITS:
            raise ResourceLimitError(f"probability vector for n={self.n} is too large")
        offset, basis = self.support()
        points = np.array([offset], dtype=np.int64)
        for v in basis:
            points = np.concatenate([points, points ^ v])
        probs = np.zeros(2**self.n)
        probs[points] = 2.0 ** -len(basis)
        return probs


def _gf2_rank(rows: list[int]) -> int:
    rank = 0
    rows = list(rows)
    while rows:
        pivot = rows.pop()
        if pivot == 0:
            continue
        rank += 1
        low = pivot & -pivot
        rows = [r ^ pivot if r & low else r for r in rows]
    return rank


def _solve_gf2(constraints: list[tuple[int, int]], n: int) -> int:
    """One solution x of z_j . x = b_j (mod 2), free variables set to 0."""
    rows = list(constraints)
    pivots: list[tuple[int, int, int]] = []
    for col in range(n):
        bit = 1 << col
        pick = next((k for k, (z, _) in enumerate(rows) if z & bit), None)
        if pick is None:
            continue
        z, b = rows.pop(pick)
        rows = [(rz ^ z, rb ^ b) if rz & bit else (rz, rb) for rz, rb in rows]
        pivots = [(pz ^ z, pb ^ b, pc) if pz & bit else (pz, pb, pc) for pz, pb, pc in pivots]
        pivots.append((z, b, col))
    if any(z == 0 and b for z, b in rows):
        raise ValidationError("inconsistent stabilizer constraints")
    x = 0
    for _, b, col in pivots:
        if b:
            x |= 1 << col
    return x


def final_tableau(circuit: CircuitRealization) -> StabilizerTableau:
    """Noiseless stabilizer evolution of |0^n>."""
    _require_clifford(circuit)
    tableau = StabilizerTableau.zero_state(circuit.n)
    for ops in circuit.gates:
        for op in ops:
            assert op.clifford_id is not None
            tableau.apply_clifford(op.clifford_id, op.sites)
    return tableau


def sample_clifford_circuit(
    arch: ArchitectureSpec,
    seed: int | np.random.Generator,
    noise: PauliChannel | HeraldedDephasingSpec | None = None,
    *,
    locations: NoiseLocationSet | None = None,
) -> CircuitRealization:
    """Draw every two-qubit gate uniformly from the Clifford table."""
    rng = as_generator(seed)
    gates = tuple(
        tuple(
            GateOp(sites=pair, clifford_id=int(rng.integers(CLIFFORD_GROUP_ORDER)))
            for pair in layer
        )
        for layer in arch.layers
    )
    return _attach_noise(arch, gates, rng, noise, locations, seed)


def extreme_event_circuit(
    arch: ArchitectureSpec,
    seed: int | np.random.Generator,
    noise: PauliChannel | HeraldedDephasingSpec | None = None,
) -> CircuitRealization:
    """A random Clifford circuit whose gates on site 0 all fix +Z on site 0.

    Gates touching site 0 are oriented with site 0 as local qubit 0. Under
    Pauli noise the site-0 marginal then evolves only through the noise.
    """
    rng = as_generator(seed)
    fixing = z1_fixing_ids()
    layers = []
    for layer in arch.layers:
        ops = []
        for i, j in layer:
            if 0 in (i, j):
                partner = j if i == 0 else i
                cid = fixing[int(rng.integers(len(fixing)))]
                ops.append(GateOp(sites=(0, partner), clifford_id=cid))
            else:
                cid = int(rng.integers(CLIFFORD_GROUP_ORDER))
                ops.append(GateOp(sites=(i, j), clifford_id=cid))
        layers.append(tuple(ops))
    return _attach_noise(arch, tuple(layers), rng, noise, None, seed)


def _attach_noise(
    arch: ArchitectureSpec,
    gates: tuple[tuple[GateOp, ...], ...],
    rng: np.random.Generator,
    noise: PauliChannel | HeraldedDephasingSpec | None,
    locations: NoiseLocationSet | None,
    seed: int | np.random.Generator,
) -> CircuitRealization:
    realized: PauliChannel | NoiseLocationSet | None = None
    dephasing_q = 0.0
    if isinstance(noise, HeraldedDephasingSpec):
        realized = locations if locations is not None else sample_noise_locations(arch, noise, rng)
        dephasing_q = noise.q
    elif isinstance(noise, PauliChannel):
        realized = noise
    return CircuitRealization(
        architecture=arch,
        gates=gates,
        noise=realized,
        dephasing_q=dephasing_q,
        seed=seed if isinstance(seed, int) else None,
        gate_set=GateSet.CLIFFORD,
    )


def noiseless_clifford_distribution(
    circuit: CircuitRealization,
) -> tuple[OutputDistribution, float]:
    """Output distribution of the gates alone and Z(U, I) = p_max."""
    tableau = final_tableau(circuit)
    probs = tableau.probabilities()
    return OutputDistribution(circuit.n, probs), float(probs.max())


@dataclass
class NoisyCliffordResult:
    """Exact distribution (exact mode) or a Monte Carlo Z estimate."""

    collision: float
    stderr: float = 0.0
    distribution: OutputDistribution | None = None
    mode: str = "exact"
    discarded_mass: float = 0.0
    samples: int = 0


@dataclass(frozen=True)
class _FlipLocation:
    channel: PauliChannel
    shift_x: int
    shift_z: int

    @property
    def shift_y(self) -> int:
        return self.shift_x ^ self.shift_z


def _flip_locations(circuit: CircuitRealization) -> list[_FlipLocation]:
    """X parts of X_i and Z_i errors pushed from their location to the output."""
    out = []
    for site, m, channel in circuit.noise_locations():
        px = propagate_pauli(circuit, PauliString(1 << site, 0), m)
        pz = propagate_pauli(circuit, PauliString(0, 1 << site), m)
        out.append(_FlipLocation(channel, px.x, pz.x))
    return out


def _parity(values: np.ndarray) -> np.ndarray:
    v = values.copy()
    for shift in (32, 16, 8, 4, 2, 1):
        v ^= v >> shift
    return v & 1


def walsh_hadamard(vector: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform over the n bits of the index."""
    n = int(np.log2(vector.size))
    t = vector.astype(float).reshape((2,) * n)
    for axis in range(n):
        a = np.take(t, 0, axis=axis)
        b = np.take(t, 1, axis=axis)
        t = np.stack([a + b, a - b], axis=axis)
    return t.reshape(-1)


def noisy_clifford_distribution(
    circuit: CircuitRealization,
    noise: PauliChannel | NoiseLocationSet | None = None,
    dephasing_q: float | None = None,
    *,
    cap: int = DEFAULT_EXACT_CAP,
    allow_mc: bool = False,
    mc_pairs: int = 2000,
    seed: int | np.random.Generator = 0,
) -> NoisyCliffordResult:
    """Noisy output of a Clifford circuit under Pauli or heralded dephasing noise.

    Every Pauli error is moved to the output, where it shifts outcomes by its
    X part. The noisy distribution is the noiseless one XOR-convolved with
    the independent per-location shift distributions, done exactly in the
    Walsh-Hadamard domain when 2^n times the location count fits ``cap``.
    Otherwise, with ``allow_mc``, Z is estimated from pairs of sampled error
    realizations: Z = E[2^-k [s1 xor s2 in span]].
    """
    if noise is not None:
        q = dephasing_q if dephasing_q is not None else circuit.dephasing_q
        circuit = circuit.with_noise(noise, q if isinstance(noise, NoiseLocationSet) else 0.0)
    tableau = final_tableau(circuit)
    flips = _flip_locations(circuit)
    n = circuit.n
    work = (2**n) * max(1, len(flips))
    if n <= MAX_TABLEAU_VECTOR_QUBITS and work <= cap:
        logger.debug("Exact noisy Clifford mode: n=%d, %d locations", n, len(flips))
        probs = tableau.probabilities()
        if flips:
            u = np.arange(2**n, dtype=np.int64)
            character = np.ones(2**n)
            for loc in flips:
                ch = loc.channel
                sx = 1.0 - 2.0 * _parity(u & loc.shift_x)
                sy = 1.0 - 2.0 * _parity(u & loc.shift_y)
                sz = 1.0 - 2.0 * _parity(u & loc.shift_z)
                character *= (1.0 - ch.q) + ch.q_x * sx + ch.q_y * sy + ch.q_z * sz
            probs = walsh_hadamard(walsh_hadamard(probs) * character) / 2**n
            probs = np.clip(probs, 0.0, None)
            probs /= probs.sum()
        dist = OutputDistribution(n, probs)
        return NoisyCliffordResult(collision=collision_probability(dist), distribution=dist)
    if not allow_mc:
        raise ResourceLimitError(
            f"exact noisy Clifford mode needs {work} > {cap} operations; enable Monte Carlo"
        )
    logger.debug("Monte Carlo noisy Clifford mode: n=%d, %d locations", n, len(flips))
    estimate = _mc_collision(tableau, flips, as_generator(seed), mc_pairs)
    return NoisyCliffordResult(
        collision=estimate.value, stderr=estimate.stderr, mode="mc", samples=estimate.samples
    )


def _mc_collision(
    tableau: StabilizerTableau, flips: list[_FlipLocation], rng: np.random.Generator, pairs: int
) -> Estimate:
    _, basis = tableau.support()
    reduced: dict[int, int] = {}
    for v in basis:
        for low, row in reduced.items():
            if v & low:
                v ^= row
        if v:
            low = v & -v
            reduced = {k: (r ^ v if r & low else r) for k, r in reduced.items()}
            reduced[low] = v

    def in_span(v: int) -> bool:
        for low, row in reduced.items():
            if v & low:
                v ^= row
        return v == 0

    def sample_shift() -> int:
        shift = 0
        for loc in flips:
            ch = loc.channel
            pick = rng.choice(4, p=np.clip((1.0 - ch.q, ch.q_x, ch.q_y, ch.q_z), 0.0, None))
            shift ^= (0, loc.shift_x, loc.shift_y, loc.shift_z)[pick]
        return shift

    weight = 2.0 ** -len(basis)
    values = np.array([weight * in_span(sample_shift() ^ sample_shift()) for _ in range(pairs)])
    stderr = float(values.std(ddof=1) / np.sqrt(pairs)) if pairs > 1 else 0.0
    return Estimate(value=float(values.mean()), stderr=stderr, samples=pairs)


@dataclass
class MonotonicityReport:
    """Z with and without noise for one Clifford circuit."""

    z_noisy: float
    z_noiseless: float
    holds: bool
    stderr: float = 0.0


def verify_noise_monotonicity(
    circuit: CircuitRealization,
    noise: PauliChannel | NoiseLocationSet | None = None,
    dephasing_q: float | None = None,
    *,
    cap: int = DEFAULT_EXACT_CAP,
) -> MonotonicityReport:
    """Check Z(U, E) <= Z(U, I) + 1e-10 in exact mode."""
    _, z_noiseless = noiseless_clifford_distribution(circuit)
    noisy = noisy_clifford_distribution(circuit, noise, dephasing_q, cap=cap)
    return MonotonicityReport(
        z_noisy=noisy.collision,
        z_noiseless=z_noiseless,
        holds=noisy.collision <= z_noiseless + MONOTONICITY_TOL,
    )


def group_table_text() -> str:
    """One line per element: id and the signed images of X0 Z0 X1 Z1."""
    lines = ["# id X0 Z0 X1 Z1"]
    for cid, element in enumerate(clifford_table().elements):
        lines.append(f"{cid} " + " ".join(img.label(2) for img in element.images))
    return "\n".join(lines) + "\n"
