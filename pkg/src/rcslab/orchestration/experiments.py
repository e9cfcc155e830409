"""Parameter scans: grid cells, per-sample work and result records.

Each scan expands an :class:`ExperimentConfig` into cells, samples every
cell in blocks on a :class:`WorkerPool`, and reduces the merged samples into
:class:`ResultRecord` rows with bound verdicts. Sample ``i`` of a cell
always draws from ``stream(seed, *cell.words, i)``.
"""

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field, replace
from functools import partial
from itertools import product
from typing import Any

import numpy as np

from rcslab import __version__
from rcslab.bounds import (
    BoundReport,
    anticoncentration_threshold,
    bounds_table,
    cauchy_schwarz_tvd_bound,
    collision_tvd_bound,
    depth_threshold,
    mu_lower,
    noisy_variant,
    paley_zygmund_floor,
    porter_thomas_tvd,
    reference_constants,
    tvd_lower_bound,
    tvd_upper_bound_report,
    typicality_tail_report,
    typicality_threshold,
)
from rcslab.circuits.architecture import (
    ArchitectureSpec,
    build_architecture,
    correlation_neighbourhood,
)
from rcslab.circuits.noise import NoiseLocationSet
from rcslab.circuits.realization import CircuitRealization
from rcslab.core.config import ExperimentConfig
from rcslab.core.errors import ResourceLimitError, ValidationError
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
from rcslab.core.seeds import stable_key, stream
from rcslab.engines.clifford import (
    noiseless_clifford_distribution,
    noisy_clifford_distribution,
    sample_clifford_circuit,
)
from rcslab.engines.dense import (
    OutputDistribution,
    check_qubit_cap,
    collision_probability,
    global_haar_distribution,
    output_distribution,
    sample_haar_circuit,
    simulate_noisy_circuit,
    tvd_to_uniform,
)
from rcslab.engines.statmech import (
    Convention,
    check_convention,
    collision_upper_bound,
    exact_average_collision,
    exact_average_collision_over_locations,
    location_averaged,
    modified_ensemble_average,
    modified_ensemble_average_over_locations,
)
from rcslab.orchestration.pool import WorkerPool, merge_cell, split_blocks
from rcslab.orchestration.statistics import (
    compare_lower,
    compare_two_sided,
    compare_upper,
    mean_stderr,
    tolerance_fields,
    worst,
)

logger = logging.getLogger(__name__)

LOG_FLOOR = 1e-300
CLIFFORD_MC_PAIRS = 2000
COLLISION_BOUND_SLACK = 1e-9
GLOBAL_LAYOUT = "global"


@dataclass(frozen=True)
class Cell:
    """One point of a parameter grid."""

    experiment: str
    n: int
    d: int
    layout: str
    gate_set: str = GateSet.HAAR.value
    noise: str = NoiseKind.NONE.value
    channel: tuple[float, float, float] | None = None
    p: float | None = None
    q: float | None = None
    ensemble: str = Ensemble.CIRCUIT.value

    @property
    def words(self) -> tuple[int, int]:
        """Stream key derived from the parameter values."""
        return stable_key(
            (
                self.experiment, self.n, self.d, self.layout, self.gate_set,
                self.noise, self.channel, self.p, self.q, self.ensemble,
            )
        )

    @property
    def key(self) -> str:
        w0, w1 = self.words
        return f"{w0:08x}{w1:08x}"

    def noise_model(self) -> PauliChannel | HeraldedDephasingSpec | None:
        if self.noise == NoiseKind.PAULI.value and self.channel is not None:
            return PauliChannel(*self.channel)
        if self.noise == NoiseKind.DEPHASING.value and self.p is not None and self.q is not None:
            return HeraldedDephasingSpec(self.p, self.q)
        return None

    def describe(self) -> str:
        parts = [f"n={self.n}", f"d={self.d}", self.layout, self.gate_set]
        if self.channel is not None:
            parts.append("q=({:g},{:g},{:g})".format(*self.channel))
        if self.p is not None:
            parts.append(f"p={self.p:g} q={self.q:g}")
        return " ".join(parts)


@dataclass(frozen=True)
class EngineSettings:
    """Engine switches shared by every cell of a scan."""

    leading_layer: bool = False
    readout_layer: bool = True
    dense_cap: int = 10
    allow_large_dense: bool = False
    statmech_cap: int = 24
    clifford_exact_cap: int = 2**24
    clifford_mc: bool = False
    compare_noiseless: bool = False

    @classmethod
    def from_config(cls, config: ExperimentConfig) -> "EngineSettings":
        return cls(
            leading_layer=config.leading_layer,
            readout_layer=config.readout_layer,
            dense_cap=config.dense_cap,
            allow_large_dense=config.allow_large_dense,
            statmech_cap=config.statmech_cap,
            clifford_exact_cap=config.clifford_exact_cap,
            clifford_mc=config.clifford_mc,
            compare_noiseless=config.compare_noiseless,
        )

    @property
    def convention(self) -> Convention:
        return Convention.LEADING_LAYER if self.leading_layer else Convention.NO_LEADING_LAYER


@dataclass
class CellOutcome:
    """Merged samples of one cell, or the reason it was skipped."""

    cell: Cell
    rows: np.ndarray | None
    error: str | None = None
    wall_time: float = 0.0

    @property
    def samples(self) -> int:
        return 0 if self.rows is None else int(self.rows.shape[0])


@dataclass
class CircuitOutput:
    distribution: OutputDistribution | None
    collision: float


@dataclass
class RecordFactory:
    """Builds records that share a scan's seed and a cell's parameters."""

    seed: int
    timings: bool = False
    records: list[ResultRecord] = field(default_factory=list)

    def add(
        self,
        outcome: CellOutcome,
        estimator: str,
        value: float,
        stderr: float = 0.0,
        *,
        bound_name: str | None = None,
        bound_value: float | None = None,
        verdict: Verdict = Verdict.INFO,
        alpha: float | None = None,
        notes: str = "",
        extra: dict[str, Any] | None = None,
        confident: bool = False,
    ) -> ResultRecord:
        cell = outcome.cell
        qx, qy, qz = cell.channel if cell.channel is not None else (None, None, None)
        record = ResultRecord(
            experiment=cell.experiment,
            n=cell.n,
            d=cell.d,
            layout=cell.layout,
            estimator=estimator,
            value=float(value),
            stderr=float(stderr),
            samples=outcome.samples,
            seed=self.seed,
            qx=qx,
            qy=qy,
            qz=qz,
            p=cell.p,
            q=cell.q,
            alpha=alpha,
            bound_name=bound_name,
            bound_value=None if bound_value is None else float(bound_value),
            verdict=verdict,
            cell_key=cell.key,
            engine_version=f"rcslab-{__version__}/{cell.gate_set}",
            notes=notes,
            wall_time=outcome.wall_time if self.timings else None,
            extra={"gate_set": cell.gate_set, "ensemble": cell.ensemble, **(extra or {})},
        )
        if bound_name is not None:
            record.extra.update(tolerance_fields(confident))
        self.records.append(record)
        return record


def sample_rng(master_seed: int, cell: Cell, index: int) -> np.random.Generator:
    return stream(master_seed, *cell.words, index)


def cell_architecture(
    cell: Cell, master_seed: int, rng: np.random.Generator | None = None
) -> ArchitectureSpec:
    """The cell's architecture.

    Random per-layer matchings are redrawn from ``rng`` for every sample
    when one is given; every other layout is fixed by the cell stream.
    """
    kind = LayoutKind(cell.layout)
    if kind is LayoutKind.RANDOM_MATCHING_PER_LAYER and rng is not None:
        return build_architecture(cell.n, cell.d, kind, rng)
    return build_architecture(cell.n, cell.d, kind, stream(master_seed, *cell.words))


def sample_circuit(
    cell: Cell, settings: EngineSettings, master_seed: int, rng: np.random.Generator
) -> CircuitRealization:
    arch = cell_architecture(cell, master_seed, rng)
    noise = cell.noise_model()
    if cell.gate_set == GateSet.CLIFFORD.value:
        return sample_clifford_circuit(arch, rng, noise)
    return sample_haar_circuit(
        arch,
        rng,
        noise,
        leading_layer=settings.leading_layer,
        readout_layer=settings.readout_layer,
    )


def evaluate_circuit(
    circuit: CircuitRealization, settings: EngineSettings, rng: np.random.Generator
) -> CircuitOutput:
    """Output distribution (when available) and collision probability."""
    if circuit.gate_set is GateSet.CLIFFORD:
        result = noisy_clifford_distribution(
            circuit,
            cap=settings.clifford_exact_cap,
            allow_mc=settings.clifford_mc,
            mc_pairs=CLIFFORD_MC_PAIRS,
            seed=rng,
        )
        return CircuitOutput(result.distribution, result.collision)
    state = simulate_noisy_circuit(
        circuit, cap=settings.dense_cap, allow_large=settings.allow_large_dense
    )
    dist = output_distribution(state)
    return CircuitOutput(dist, collision_probability(dist))


def noiseless_collision(
    circuit: CircuitRealization, settings: EngineSettings, rng: np.random.Generator
) -> float:
    if circuit.gate_set is GateSet.CLIFFORD:
        return noiseless_clifford_distribution(circuit)[1]
    return evaluate_circuit(circuit.without_noise(), settings, rng).collision


# Block functions: module level so the process executor can pickle them.


def _tvd_block(
    cells: tuple[Cell, ...],
    settings: EngineSettings,
    master_seed: int,
    index: int,
    start: int,
    stop: int,
) -> np.ndarray:
    """Columns: delta, Z."""
    cell = cells[index]
    rows = []
    for i in range(start, stop):
        rng = sample_rng(master_seed, cell, i)
        out = evaluate_circuit(sample_circuit(cell, settings, master_seed, rng), settings, rng)
        if out.distribution is None:
            raise ResourceLimitError(
                "TVD needs the exact output distribution; Clifford Monte Carlo mode only gives Z"
            )
        rows.append((tvd_to_uniform(out.distribution), out.collision))
    return np.array(rows, dtype=float).reshape(-1, 2)


def _anticoncentration_block(
    cells: tuple[Cell, ...],
    settings: EngineSettings,
    master_seed: int,
    index: int,
    start: int,
    stop: int,
) -> np.ndarray:
    """Columns: Z, p_0, delta, noiseless Z (NaN where unavailable)."""
    cell = cells[index]
    rows = []
    for i in range(start, stop):
        rng = sample_rng(master_seed, cell, i)
        if cell.ensemble == Ensemble.GLOBAL.value:
            dist = global_haar_distribution(cell.n, rng)
            z = collision_probability(dist)
            rows.append((z, float(dist.probs[0]), tvd_to_uniform(dist), z))
            continue
        circuit = sample_circuit(cell, settings, master_seed, rng)
        out = evaluate_circuit(circuit, settings, rng)
        p0 = math.nan if out.distribution is None else float(out.distribution.probs[0])
        delta = math.nan if out.distribution is None else tvd_to_uniform(out.distribution)
        z0 = math.nan
        if settings.compare_noiseless:
            z0 = noiseless_collision(circuit, settings, rng)
        rows.append((out.collision, p0, delta, z0))
    return np.array(rows, dtype=float).reshape(-1, 4)


def _moments_block(
    cells: tuple[Cell, ...],
    settings: EngineSettings,
    master_seed: int,
    index: int,
    start: int,
    stop: int,
) -> np.ndarray:
    """Columns: p_{i0} for every site i of a noiseless circuit."""
    cell = cells[index]
    arch = cell_architecture(cell, master_seed)
    rows = []
    for i in range(start, stop):
        rng = sample_rng(master_seed, cell, i)
        circuit = sample_haar_circuit(arch, rng, leading_layer=settings.leading_layer)
        dist = evaluate_circuit(circuit, settings, rng).distribution
        assert dist is not None
        tensor = dist.probs.reshape((2,) * cell.n)
        rows.append(
            [float(np.take(tensor, 0, axis=cell.n - 1 - site).sum()) for site in range(cell.n)]
        )
    return np.array(rows, dtype=float).reshape(-1, cell.n)


def _statmech_block(
    cells: tuple[Cell, ...],
    settings: EngineSettings,
    master_seed: int,
    index: int,
    start: int,
    stop: int,
) -> np.ndarray:
    """Columns: dense Z, statmech E[Z | L], SWAP-ensemble E[Z | L]."""
    cell = cells[index]
    arch = cell_architecture(cell, master_seed)
    spec = cell.noise_model()
    assert isinstance(spec, HeraldedDephasingSpec)
    rows = []
    for i in range(start, stop):
        rng = sample_rng(master_seed, cell, i)
        circuit = sample_haar_circuit(
            arch,
            rng,
            spec,
            leading_layer=settings.leading_layer,
            readout_layer=settings.readout_layer,
        )
        rows.append(crosscheck_sample(circuit, settings, rng))
    return np.array(rows, dtype=float).reshape(-1, 3)


def crosscheck_sample(
    circuit: CircuitRealization, settings: EngineSettings, rng: np.random.Generator
) -> tuple[float, float, float]:
    """Dense Z, statmech E[Z | L] and SWAP-ensemble E[Z | L] for one dephased circuit.

    Raises:
        ConventionMismatchError: If the circuit's leading layer disagrees with
            the statmech convention of ``settings``.
    """
    check_convention(circuit.leading is not None, settings.convention)
    locations = circuit.noise
    if not isinstance(locations, NoiseLocationSet):
        raise ValidationError("statmech cross-check needs heralded dephasing locations")
    kwargs: dict[str, Any] = {
        "convention": settings.convention,
        "readout_layer": settings.readout_layer,
        "cap": settings.statmech_cap,
    }
    arch = circuit.architecture
    return (
        evaluate_circuit(circuit, settings, rng).collision,
        exact_average_collision(arch, locations, circuit.dephasing_q, **kwargs),
        modified_ensemble_average(arch, locations, circuit.dephasing_q, **kwargs),
    )


BlockFunction = Callable[
    [tuple[Cell, ...], EngineSettings, int, int, int, int], np.ndarray
]


def _noise_variants(
    config: ExperimentConfig, experiment: Experiment
) -> list[dict[str, Any]]:
    dephasing = [
        {"noise": NoiseKind.DEPHASING.value, "p": float(p), "q": float(q)}
        for p, q in product(config.p, config.q)
    ]
    pauli = [
        {"noise": NoiseKind.PAULI.value, "channel": tuple(float(v) for v in c)}
        for c in config.channels
    ]
    if experiment is Experiment.STATMECH_CHECK:
        return dephasing
    if experiment is Experiment.MOMENTS:
        return [{}]
    if experiment is Experiment.TYPICALITY:
        if config.noise == NoiseKind.PAULI.value:
            return pauli
        return [{"noise": NoiseKind.PAULI.value, "channel": (0.0, 0.0, 0.0)}]
    if config.noise == NoiseKind.PAULI.value:
        return pauli
    if config.noise == NoiseKind.DEPHASING.value:
        return dephasing
    return [{}]


def build_cells(config: ExperimentConfig, experiment: Experiment) -> list[Cell]:
    """Expand the grid in a fixed order: n, d, layout, gate set, noise."""
    if experiment is Experiment.ANTICONC_SCAN and config.ensemble == Ensemble.GLOBAL.value:
        return [
            Cell(experiment.value, n, 0, GLOBAL_LAYOUT, ensemble=Ensemble.GLOBAL.value)
            for n in config.n
        ]
    sweeps_gates = experiment in (Experiment.TVD_SCAN, Experiment.ANTICONC_SCAN)
    gate_sets = config.gate_sets if sweeps_gates else [GateSet.HAAR.value]
    cells = []
    for n, d, layout in product(config.n, config.d, config.layout):
        for gate_set in gate_sets:
            for variant in _noise_variants(config, experiment):
                cells.append(Cell(experiment.value, n, d, layout, gate_set=gate_set, **variant))
    return cells


def _preflight(cell: Cell, settings: EngineSettings, experiment: Experiment) -> None:
    """Raise ResourceLimitError for cells no engine can run."""
    if cell.gate_set == GateSet.HAAR.value:
        check_qubit_cap(cell.n, settings.dense_cap, settings.allow_large_dense)
    if experiment is Experiment.STATMECH_CHECK and cell.n > settings.statmech_cap:
        raise ResourceLimitError(
            f"statmech vector for n={cell.n} exceeds the cap of {settings.statmech_cap}"
        )


def sample_cells(
    config: ExperimentConfig,
    experiment: Experiment,
    block_fn: BlockFunction,
    settings: EngineSettings | None = None,
) -> list[CellOutcome]:
    """Sample every cell of the grid; skipped cells carry their error."""
    settings = settings or EngineSettings.from_config(config)
    cells = build_cells(config, experiment)
    logger.info(
        "Starting %s: %d cell(s) x %d sample(s)", experiment.value, len(cells), config.samples
    )
    skipped: dict[int, str] = {}
    tasks = []
    for i, cell in enumerate(cells):
        try:
            _preflight(cell, settings, experiment)
        except ResourceLimitError as e:
            skipped[i] = str(e)
            continue
        tasks.extend(split_blocks(i, config.samples, config.block_size))

    pool = WorkerPool(config.workers, config.executor)
    results = pool.run(partial(block_fn, tuple(cells), settings, config.seed), tasks)

    outcomes = []
    for i, cell in enumerate(cells):
        if i in skipped:
            rows, error, elapsed = None, skipped[i], 0.0
        else:
            rows, error, elapsed = merge_cell(results, i)
        if error is not None:
            logger.warning("Skipping cell %s: %s", cell.describe(), error)
        else:
            logger.info("Cell %s done: %d sample(s)", cell.describe(), config.samples)
        outcomes.append(CellOutcome(cell, rows, error, elapsed))
    logger.info("Finished %s", experiment.value)
    return outcomes


def _skip(factory: RecordFactory, outcome: CellOutcome) -> None:
    factory.add(outcome, "skipped", 0.0, notes=outcome.error or "")


def _vacuous_or(check: Verdict, bound: float) -> Verdict:
    return Verdict.VACUOUS if bound >= 1.0 else check


def _finite(value: float) -> float | None:
    return value if math.isfinite(value) else None


def run_tvd_scan(config: ExperimentConfig) -> list[ResultRecord]:
    """Mean TVD to uniform per cell against the lower or upper TVD bound."""
    factory = RecordFactory(config.seed, config.timings)
    for outcome in sample_cells(config, Experiment.TVD_SCAN, _tvd_block):
        if outcome.rows is None:
            _skip(factory, outcome)
            continue
        cell = outcome.cell
        delta, z = outcome.rows[:, 0], outcome.rows[:, 1]
        mean, se = mean_stderr(delta)
        model = cell.noise_model()
        if isinstance(model, HeraldedDephasingSpec):
            report = tvd_upper_bound_report(cell.n, cell.d, model.p, model.q)
            factory.add(
                outcome, "tvd_mean", mean, se,
                bound_name=report.name,
                bound_value=report.value,
                verdict=_vacuous_or(
                    compare_upper(mean, se, report.value, confident=True), report.value
                ),
                confident=True,
            )
        else:
            channel = model if model is not None else PauliChannel(0.0, 0.0, 0.0)
            bound = tvd_lower_bound(channel, cell.d)
            factory.add(
                outcome, "tvd_mean", mean, se,
                bound_name="tvd_lower",
                bound_value=bound,
                verdict=compare_lower(mean, se, bound, confident=True),
                confident=True,
            )
        z_mean, z_se = mean_stderr(z)
        factory.add(outcome, "collision_mean", z_mean, z_se)
        collision_bounds = np.array(
            [
                min(collision_tvd_bound(cell.n, zi), cauchy_schwarz_tvd_bound(cell.n, zi))
                for zi in z
            ]
        )
        excess = float(np.max(delta - collision_bounds))
        factory.add(
            outcome, "tvd_excess_over_collision_bound", excess,
            bound_name="collision_tvd_bound",
            bound_value=0.0,
            verdict=compare_upper(excess, 0.0, 0.0, slack=COLLISION_BOUND_SLACK),
        )
    return factory.records


def _pooled_collision_checks(factory: RecordFactory, outcomes: list[CellOutcome]) -> None:
    """Haar and Clifford gate sets give the same mean Z (two-design property)."""
    by_params: dict[Cell, dict[str, tuple[np.ndarray, float]]] = {}
    for outcome in outcomes:
        if outcome.rows is None or outcome.cell.ensemble != Ensemble.CIRCUIT.value:
            continue
        generic = replace(outcome.cell, gate_set=GateSet.HAAR.value)
        by_params.setdefault(generic, {})[outcome.cell.gate_set] = (
            outcome.rows[:, 0],
            outcome.wall_time,
        )
    for generic, pair in by_params.items():
        if set(pair) != {GateSet.HAAR.value, GateSet.CLIFFORD.value}:
            continue
        scale = 2.0**generic.n
        haar_z, haar_time = pair[GateSet.HAAR.value]
        cliff_z, cliff_time = pair[GateSet.CLIFFORD.value]
        haar_mean, haar_se = mean_stderr(haar_z * scale)
        cliff_mean, cliff_se = mean_stderr(cliff_z * scale)
        diff = haar_mean - cliff_mean
        se = math.hypot(haar_se, cliff_se)
        combined = CellOutcome(
            replace(generic, gate_set="haar-vs-clifford"),
            np.column_stack([haar_z, cliff_z]),
            wall_time=haar_time + cliff_time,
        )
        factory.add(
            combined, "collision_scaled_gate_set_diff", diff, se,
            bound_name="two_design",
            bound_value=0.0,
            verdict=compare_two_sided(diff, se, 0.0),
        )


def run_anticoncentration_scan(config: ExperimentConfig) -> list[ResultRecord]:
    """Pr[p_0 >= alpha 2^-n] and 2^n E[Z] with the Paley-Zygmund check."""
    factory = RecordFactory(config.seed, config.timings)
    outcomes = sample_cells(config, Experiment.ANTICONC_SCAN, _anticoncentration_block)
    for outcome in outcomes:
        if outcome.rows is None:
            _skip(factory, outcome)
            continue
        cell = outcome.cell
        z, p0, delta, z0 = (outcome.rows[:, k] for k in range(4))
        scale = 2.0**cell.n
        z_mean, _ = mean_stderr(z)
        scaled_mean, scaled_se = mean_stderr(z * scale)
        is_global = cell.ensemble == Ensemble.GLOBAL.value
        refs = reference_constants(cell.n)
        if is_global:
            reference = scale * refs.haar_collision
            factory.add(
                outcome, "collision_scaled", scaled_mean, scaled_se,
                bound_name="haar_collision_scaled",
                bound_value=reference,
                verdict=compare_two_sided(scaled_mean, scaled_se, reference),
            )
        else:
            factory.add(outcome, "collision_scaled", scaled_mean, scaled_se)

        has_p0 = ~np.isnan(p0)
        if not has_p0.any():
            logger.warning(
                "No output distributions for %s; skipping p_0 estimates", cell.describe()
            )
        for alpha in config.alpha:
            if not has_p0.any():
                break
            hits = (p0[has_p0] >= float(alpha) / scale).astype(float)
            prob, prob_se = mean_stderr(hits)
            floor = paley_zygmund_floor(float(alpha), cell.n, z_mean)
            factory.add(
                outcome, "prob_p0_ge_alpha", prob, prob_se,
                alpha=float(alpha),
                bound_name="paley_zygmund",
                bound_value=floor,
                verdict=compare_lower(prob, prob_se, floor),
            )

        has_delta = ~np.isnan(delta)
        if has_delta.any():
            delta_mean, delta_se = mean_stderr(delta[has_delta])
            if is_global:
                reference = porter_thomas_tvd(cell.n)
                factory.add(
                    outcome, "tvd_mean", delta_mean, delta_se,
                    bound_name="porter_thomas_tvd",
                    bound_value=reference,
                    verdict=compare_two_sided(delta_mean, delta_se, reference),
                )
                factory.add(
                    outcome, "porter_thomas_limit", refs.porter_thomas_tvd_floor,
                    notes="large-n limit of the expected TVD",
                )
            else:
                factory.add(outcome, "tvd_mean", delta_mean, delta_se)

        has_z0 = ~np.isnan(z0)
        if not is_global and has_z0.any():
            clean_mean, clean_se = mean_stderr(z0[has_z0] * scale)
            factory.add(outcome, "collision_scaled_noiseless", clean_mean, clean_se)
            gap_mean, gap_se = mean_stderr((z0[has_z0] - z[has_z0]) * scale)
            factory.add(
                outcome, "collision_noise_gap", gap_mean, gap_se,
                bound_name="noise_monotonicity",
                bound_value=0.0,
                verdict=compare_lower(gap_mean, gap_se, 0.0),
            )
    _pooled_collision_checks(factory, outcomes)
    return factory.records


def _column_stats(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = values.mean(axis=0)
    if values.shape[0] < 2:
        return mean, np.zeros_like(mean)
    return mean, values.std(axis=0, ddof=1) / math.sqrt(values.shape[0])


def run_logprob_moments(config: ExperimentConfig) -> list[ResultRecord]:
    """Moments of -log p_{i0} for noiseless circuits and lightcone decorrelation."""
    factory = RecordFactory(config.seed, config.timings)
    for outcome in sample_cells(config, Experiment.MOMENTS, _moments_block):
        if outcome.rows is None:
            _skip(factory, outcome)
            continue
        cell = outcome.cell
        probs = outcome.rows
        floored = probs < LOG_FLOOR
        floored_fraction = float(floored.mean())
        if floored.any():
            logger.warning(
                "Floored %d log-probabilit(ies) at %g in %s",
                int(floored.sum()), LOG_FLOOR, cell.describe(),
            )
        logs = np.log(np.maximum(probs, LOG_FLOOR))
        neg = -logs
        mu, mu_se = _column_stats(neg)
        count = neg.shape[0]
        sigma = neg.std(axis=0, ddof=1) if count > 1 else np.zeros(cell.n)
        lower = mu_lower(cell.d) if cell.d >= 1 else None
        refs = reference_constants(cell.n)

        for site in range(cell.n):
            name = f"mu_hat_{site}"
            if lower is None:
                factory.add(
                    outcome, name, mu[site], mu_se[site], notes="d = 0: bounds need d >= 1"
                )
            else:
                factory.add(
                    outcome, name, mu[site], mu_se[site],
                    bound_name="mu_lower",
                    bound_value=lower,
                    verdict=compare_lower(mu[site], mu_se[site], lower),
                )
                factory.add(
                    outcome, name, mu[site], mu_se[site],
                    bound_name="mu_upper",
                    bound_value=refs.mu_upper,
                    verdict=compare_upper(mu[site], mu_se[site], refs.mu_upper),
                )
        for site in range(cell.n):
            sigma_se = sigma[site] / math.sqrt(2.0 * (count - 1)) if count > 1 else 0.0
            factory.add(outcome, f"sigma_hat_{site}", sigma[site], sigma_se)

        centered = logs + mu
        s2_mean, s2_se = mean_stderr(centered.sum(axis=1) ** 2 / cell.n)
        factory.add(outcome, "s2_hat", s2_mean, s2_se)

        arch = cell_architecture(cell, config.seed)
        for i in range(cell.n):
            near = correlation_neighbourhood(arch, i)
            for j in range(i + 1, cell.n):
                if j in near:
                    continue
                cov, cov_se = mean_stderr(centered[:, i] * centered[:, j])
                factory.add(
                    outcome, f"cov_{i}_{j}", cov, cov_se,
                    bound_name="lightcone_independence",
                    bound_value=0.0,
                    verdict=compare_two_sided(cov, cov_se, 0.0),
                )
        factory.add(outcome, "floored_fraction", floored_fraction)
    return factory.records


def run_statmech_crosscheck(config: ExperimentConfig) -> list[ResultRecord]:
    """Statmech values against dense sampling plus the ordering chain."""
    factory = RecordFactory(config.seed, config.timings)
    settings = EngineSettings.from_config(config)
    convention = settings.convention
    for outcome in sample_cells(config, Experiment.STATMECH_CHECK, _statmech_block, settings):
        if outcome.rows is None:
            _skip(factory, outcome)
            continue
        cell = outcome.cell
        spec = cell.noise_model()
        assert isinstance(spec, HeraldedDephasingSpec)
        arch = cell_architecture(cell, config.seed)
        kwargs: dict[str, Any] = {
            "convention": convention,
            "readout_layer": settings.readout_layer,
            "cap": settings.statmech_cap,
        }
        exact = exact_average_collision_over_locations(arch, spec, **kwargs)
        modified = modified_ensemble_average_over_locations(arch, spec, **kwargs)
        dense_z, exact_l, modified_l = (outcome.rows[:, k] for k in range(3))

        factory.add(outcome, "statmech_exact", exact)
        dense_mean, dense_se = mean_stderr(dense_z)
        factory.add(
            outcome, "dense_mc_collision", dense_mean, dense_se,
            bound_name="statmech_exact",
            bound_value=exact,
            verdict=compare_two_sided(dense_mean, dense_se, exact),
        )
        sampled_mean, sampled_se = mean_stderr(exact_l)
        factory.add(
            outcome, "statmech_exact_sampled_locations", sampled_mean, sampled_se,
            bound_name="statmech_exact",
            bound_value=exact,
            verdict=compare_two_sided(sampled_mean, sampled_se, exact),
        )
        worst_gap = float(np.max(exact_l - modified_l))
        factory.add(
            outcome, "ordering_exact_minus_modified_max", worst_gap,
            bound_name="per_location_ordering",
            bound_value=0.0,
            verdict=compare_upper(worst_gap, 0.0, 0.0),
        )
        factory.add(
            outcome, "ordering_exact_le_modified", exact,
            bound_name="modified_ensemble",
            bound_value=modified,
            verdict=compare_upper(exact, 0.0, modified),
        )

        # Without the readout layer the final round of dephasing is invisible.
        effective_d = cell.d if settings.readout_layer else max(cell.d - 1, 0)
        if cell.d == 0 and convention is Convention.NO_LEADING_LAYER:
            note = "d = 0 without a leading layer: point-mass output"
            factory.add(outcome, "modified_closed_form", modified, notes=note)
            continue
        closed = location_averaged(cell.n, effective_d, spec.p, spec.q)
        factory.add(
            outcome, "modified_closed_form", modified,
            bound_name="location_averaged",
            bound_value=closed,
            verdict=compare_two_sided(modified, 0.0, closed),
        )
        upper_bound = collision_upper_bound(cell.n, effective_d, spec.p, spec.q)
        factory.add(
            outcome, "ordering_modified_le_bound", modified,
            bound_name="collision_upper",
            bound_value=upper_bound,
            verdict=compare_upper(modified, 0.0, upper_bound),
        )
    return factory.records


def run_typicality_scan(config: ExperimentConfig) -> list[ResultRecord]:
    """Empirical Pr[delta < e^(-2ad)] against the tail bound."""
    factory = RecordFactory(config.seed, config.timings)
    for outcome in sample_cells(config, Experiment.TYPICALITY, _tvd_block):
        if outcome.rows is None:
            _skip(factory, outcome)
            continue
        cell = outcome.cell
        assert cell.channel is not None
        channel = PauliChannel(*cell.channel)
        threshold = typicality_threshold(cell.d, channel)
        hits = (outcome.rows[:, 0] < threshold).astype(float)
        prob, prob_se = mean_stderr(hits)
        report = typicality_tail_report(cell.n, cell.d, channel)
        if report.value >= 1.0:
            logger.warning("Tail bound is vacuous for %s", cell.describe())
            verdict = Verdict.VACUOUS
        else:
            verdict = compare_upper(prob, prob_se, report.value)
        factory.add(
            outcome, "tail_prob_below_threshold", prob, prob_se,
            bound_name=report.name,
            bound_value=_finite(report.value),
            verdict=verdict,
            notes=report.notes,
            extra={"threshold": threshold, "log_bound": report.log_value},
        )
    return factory.records


def _bound_record(
    factory: RecordFactory, experiment: str, n: int, d: int, report: BoundReport
) -> None:
    params = report.params
    channel = None
    if "qx" in params:
        channel = (params["qx"], params["qy"], params["qz"])
    cell = Cell(
        experiment, n, d, "-", noise="", channel=channel,
        p=params.get("p"), q=params.get("q") if "qx" not in params else None,
    )
    value = report.value
    estimator = report.name
    if not math.isfinite(value):
        estimator, value = f"log_{report.name}", report.log_value
    verdict = Verdict.INFO
    if report.side is BoundSide.UPPER and report.name != "collision_upper" and value >= 1.0:
        verdict = Verdict.VACUOUS
    factory.add(
        CellOutcome(cell, None), estimator, value,
        verdict=verdict,
        notes=report.notes,
        extra={"log_value": report.log_value},
    )


def run_bounds_table(config: ExperimentConfig) -> list[ResultRecord]:
    """Every closed-form bound and reference constant over the grid."""
    factory = RecordFactory(config.seed, config.timings)
    experiment = Experiment.BOUNDS_TABLE.value
    channels = config.pauli_channels
    dephasing = [HeraldedDephasingSpec(float(p), float(q)) for p, q in product(config.p, config.q)]
    for n, d in product(config.n, config.d):
        for report in bounds_table([n], [d], channels, dephasing):
            _bound_record(factory, experiment, n, d, report)
        outcome = CellOutcome(Cell(experiment, n, d, "-", noise=""), None)
        refs = reference_constants(n)
        factory.add(outcome, "haar_collision", refs.haar_collision)
        factory.add(outcome, "porter_thomas_tvd", refs.porter_thomas_tvd)
        factory.add(outcome, "porter_thomas_limit", refs.porter_thomas_tvd_floor)
        factory.add(outcome, "mu_upper", refs.mu_upper)
        factory.add(outcome, "mu_lower", refs.mu_lower(d))
        if d >= 1:
            factory.add(outcome, "anticoncentration_threshold", anticoncentration_threshold(n, d))
        for channel in channels:
            triple = (channel.q_x, channel.q_y, channel.q_z)
            channel_outcome = CellOutcome(
                Cell(experiment, n, d, "-", noise="", channel=triple), None
            )
            factory.add(channel_outcome, "depth_threshold", depth_threshold(n, channel))
            if d >= 1:
                factory.add(
                    channel_outcome, "anticoncentration_threshold_noisy",
                    noisy_variant(n, d, channel.b),
                )
                factory.add(channel_outcome, "mu_lower_noisy", mu_lower(d, channel.b))
    logger.info("Evaluated %d bound record(s)", len(factory.records))
    return factory.records


RUNNERS: dict[Experiment, Callable[[ExperimentConfig], list[ResultRecord]]] = {
    Experiment.TVD_SCAN: run_tvd_scan,
    Experiment.ANTICONC_SCAN: run_anticoncentration_scan,
    Experiment.MOMENTS: run_logprob_moments,
    Experiment.STATMECH_CHECK: run_statmech_crosscheck,
    Experiment.TYPICALITY: run_typicality_scan,
    Experiment.BOUNDS_TABLE: run_bounds_table,
}


def run_experiment(config: ExperimentConfig) -> list[ResultRecord]:
    """Run the scan named by ``config.experiment``."""
    return RUNNERS[Experiment(config.experiment)](config)


def has_hard_failure(records: list[ResultRecord]) -> bool:
    return worst([r.verdict for r in records]) is Verdict.HARD_FAIL
