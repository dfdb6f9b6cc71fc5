"""
Process Manager for worker-pool task execution.

Runs independent tasks (Monte Carlo replicates, cross-validation folds)
either inline, on a thread pool, or on a process pool, and returns their
outcomes in submission order so results never depend on completion order.
"""

import logging
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import Executor, ProcessPoolExecutor, ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Literal

logger = logging.getLogger(__name__)

# =============================================================================
# CONSTANTS
# =============================================================================

# Log a progress line every this many completed tasks
PROGRESS_LOG_EVERY = 25

PoolKind = Literal["process", "thread"]


@dataclass(frozen=True)
class TaskOutcome:
    """
    Result of one task.

    Attributes:
        name: Task label.
        success: Whether the task returned normally.
        value: Return value (None on failure).
        message: Error text on failure, empty otherwise.
    """

    name: str
    success: bool
    value: Any = None
    message: str = ""


def _call(fn: Callable[[Any], Any], item: Any) -> tuple[bool, Any, str]:
    try:
        return True, fn(item), ""
    except Exception as e:
        return False, None, f"{type(e).__name__}: {e}"


class ProcessManager:
    """
    Manages a worker pool for independent tasks.

    With one worker, tasks run inline in the calling process, which keeps
    single-threaded runs free of pickling and pool start-up.

    Attributes:
        workers: Maximum concurrent tasks.
        kind: "process" or "thread".
        outcomes: Outcomes of the most recent map() call.
    """

    def __init__(self, workers: int = 1, kind: PoolKind = "process") -> None:
        """
        Initialize the ProcessManager.

        Args:
            workers: Maximum concurrent tasks (>= 1).
            kind: Pool type; threads suit numba kernels that release the GIL.
        """
        if workers < 1:
            raise ValueError(f"workers must be >= 1, got {workers}")
        self.workers = workers
        self.kind = kind
        self.outcomes: list[TaskOutcome] = []

    def _executor(self) -> Executor:
        if self.kind == "thread":
            return ThreadPoolExecutor(max_workers=self.workers)
        return ProcessPoolExecutor(max_workers=self.workers)

    def map(
        self,
        fn: Callable[[Any], Any],
        items: Iterable[Any],
        names: Sequence[str] | None = None,
    ) -> list[TaskOutcome]:
        """
        Run fn on every item and collect outcomes in submission order.

        Exceptions raised by a task are captured in its outcome rather than
        propagated.

        Args:
            fn: Task function; must be picklable for process pools.
            items: Task inputs.
            names: Optional labels, one per item.

        Returns:
            One TaskOutcome per item, in input order.

        Side Effects:
            - Replaces self.outcomes
        """
        items = list(items)
        labels = list(names) if names is not None else [str(i) for i in range(len(items))]
        if len(labels) != len(items):
            raise ValueError(f"{len(labels)} names for {len(items)} tasks")

        if self.workers == 1 or len(items) <= 1:
            raw = []
            for done, item in enumerate(items, start=1):
                raw.append(_call(fn, item))
                if done % PROGRESS_LOG_EVERY == 0:
                    logger.info(f"Completed {done}/{len(items)} tasks")
        else:
            logger.debug(f"Submitting {len(items)} tasks to a {self.kind} pool of {self.workers}")
            with self._executor() as pool:
                futures = [pool.submit(_call, fn, item) for item in items]
                raw = []
                for done, future in enumerate(futures, start=1):
                    raw.append(future.result())
                    if done % PROGRESS_LOG_EVERY == 0:
                        logger.info(f"Completed {done}/{len(items)} tasks")

        self.outcomes = [
            TaskOutcome(name=label, success=ok, value=value, message=message)
            for label, (ok, value, message) in zip(labels, raw, strict=True)
        ]
        for outcome in self.failures():
            logger.warning(f"Task '{outcome.name}' failed: {outcome.message}")
        return self.outcomes

    def run_all(self, fn: Callable[[Any], Any], items: Iterable[Any]) -> list[Any]:
        """
        Run fn on every item and return the values, re-raising the first failure.

        Unlike map(), exceptions propagate with their original type.
        """
        items = list(items)
        if self.workers == 1 or len(items) <= 1:
            return [fn(item) for item in items]
        with self._executor() as pool:
            return list(pool.map(fn, items))

    def failures(self) -> list[TaskOutcome]:
        """Outcomes of the last map() call that failed."""
        return [o for o in self.outcomes if not o.success]

    def get_status(self) -> tuple[int, int]:
        """(succeeded, failed) counts of the last map() call."""
        failed = len(self.failures())
        return len(self.outcomes) - failed, failed
