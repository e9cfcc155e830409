"""Scan orchestration: worker pool, statistics and experiments."""

from rcslab.orchestration.experiments import (
    RUNNERS,
    Cell,
    EngineSettings,
    build_cells,
    run_anticoncentration_scan,
    run_bounds_table,
    run_experiment,
    run_logprob_moments,
    run_statmech_crosscheck,
    run_tvd_scan,
    run_typicality_scan,
)
from rcslab.orchestration.pool import BlockTask, WorkerPool, split_blocks

__all__ = [
    "RUNNERS",
    "BlockTask",
    "Cell",
    "EngineSettings",
    "WorkerPool",
    "build_cells",
    "run_anticoncentration_scan",
    "run_bounds_table",
    "run_experiment",
    "run_logprob_moments",
    "run_statmech_crosscheck",
    "run_tvd_scan",
    "run_typicality_scan",
    "split_blocks",
]
