"""Worker pool for sample blocks.

A scan is split into independent ``(cell, block)`` tasks. Every task draws
its randomness from per-sample streams, so results only depend on the task
itself; they are merged by ``(cell, block)`` and never by completion order.
"""

import logging
import time
from collections.abc import Callable, Sequence
from concurrent.futures import Executor, ProcessPoolExecutor, ThreadPoolExecutor, as_completed
from dataclasses import dataclass

import numpy as np

from rcslab.core.errors import RcsLabError, ValidationError

logger = logging.getLogger(__name__)

BlockFn = Callable[[int, int, int], np.ndarray]


@dataclass(frozen=True)
class BlockTask:
    """Samples ``start`` to ``stop`` (exclusive) of one cell."""

    cell: int
    block: int
    start: int
    stop: int

    @property
    def size(self) -> int:
        return self.stop - self.start


@dataclass
class BlockResult:
    """Rows produced by one task, or the error that stopped it."""

    task: BlockTask
    values: np.ndarray | None = None
    error: str | None = None
    elapsed: float = 0.0

    @property
    def ok(self) -> bool:
        return self.error is None


def split_blocks(cell: int, samples: int, block_size: int) -> list[BlockTask]:
    """Cut ``samples`` into consecutive blocks of at most ``block_size``."""
    if samples < 0 or block_size < 1:
        raise ValidationError(f"invalid split: samples={samples}, block_size={block_size}")
    return [
        BlockTask(cell, block, start, min(start + block_size, samples))
        for block, start in enumerate(range(0, samples, block_size))
    ]


def run_block(fn: BlockFn, task: BlockTask) -> BlockResult:
    """Run one task, turning engine errors into a failed result."""
    started = time.perf_counter()
    try:
        values = fn(task.cell, task.start, task.stop)
    except RcsLabError as e:
        return BlockResult(task, error=str(e), elapsed=time.perf_counter() - started)
    return BlockResult(task, values=values, elapsed=time.perf_counter() - started)


class WorkerPool:
    """Runs block tasks on threads or processes and merges them deterministically."""

    def __init__(self, max_workers: int = 1, executor: str = "process"):
        if max_workers < 1:
            raise ValidationError(f"max_workers must be >= 1, got {max_workers}")
        if executor not in ("thread", "process"):
            raise ValidationError(f"executor must be 'thread' or 'process', got {executor!r}")
        self.max_workers = max_workers
        self.executor = executor

    def _make_executor(self) -> Executor:
        if self.executor == "thread":
            return ThreadPoolExecutor(max_workers=self.max_workers)
        return ProcessPoolExecutor(max_workers=self.max_workers)

    def run(self, fn: BlockFn, tasks: Sequence[BlockTask]) -> dict[tuple[int, int], BlockResult]:
        """Execute every task and return results keyed by (cell, block).

        ``fn`` must be picklable for the process executor (a module-level
        function or a functools.partial of one).
        """
        results: dict[tuple[int, int], BlockResult] = {}
        if self.max_workers == 1 or len(tasks) <= 1:
            for task in tasks:
                results[(task.cell, task.block)] = run_block(fn, task)
            return results

        with self._make_executor() as pool:
            futures = {pool.submit(run_block, fn, task): task for task in tasks}
            logger.debug(
                "Dispatched %d block(s) to %d %s worker(s)",
                len(futures), self.max_workers, self.executor,
            )
            for future in as_completed(futures):
                task = futures[future]
                result = future.result()
                if not result.ok:
                    logger.debug(
                        "Block %d of cell %d failed: %s", task.block, task.cell, result.error
                    )
                results[(task.cell, task.block)] = result
        return results


def merge_cell(
    results: dict[tuple[int, int], BlockResult], cell: int
) -> tuple[np.ndarray | None, str | None, float]:
    """Concatenate a cell's blocks in block order.

    Returns (rows, first error, total elapsed time).
    """
    blocks = sorted(
        (r for (c, _), r in results.items() if c == cell), key=lambda r: r.task.block
    )
    elapsed = sum(r.elapsed for r in blocks)
    for r in blocks:
        if not r.ok:
            return None, r.error, elapsed
    if not blocks:
        return None, "no samples", elapsed
    return np.concatenate([r.values for r in blocks if r.values is not None]), None, elapsed
