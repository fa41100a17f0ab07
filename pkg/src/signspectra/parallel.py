"""Replicate-indexed parallel execution with deterministic reduction.

Work units are (payload, replicate index) pairs evaluated by a module-level
function; results always come back ordered by index, so output is identical
for any worker count. Workers are separate processes, which keeps each BLAS
call in an environment identical to the single-worker run (thread-level
sharing could change BLAS scheduling and with it the low-order bits).

The worker count comes from the SIGNSPECTRA_WORKERS environment variable,
defaulting to the available CPU count.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

_ENV_VAR = "SIGNSPECTRA_WORKERS"

_state: dict = {}


def worker_count(explicit: int | None = None) -> int:
    if explicit is not None:
        return max(1, int(explicit))
    env = os.environ.get(_ENV_VAR)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _init_worker(fn, payload):
    _state["fn"] = fn
    _state["payload"] = payload


def _run_one(index: int):
    return _state["fn"](_state["payload"], index)


def indexed_map(fn, payload, count: int, workers: int | None = None) -> list:
    """[fn(payload, i) for i in range(count)], possibly across processes.

    ``fn`` must be a module-level function (it is sent to worker processes by
    reference). Results are ordered by index regardless of scheduling.
    """
    w = min(worker_count(workers), count)
    if w <= 1:
        return [fn(payload, i) for i in range(count)]
    chunk = max(1, count // (4 * w))
    with ProcessPoolExecutor(
        max_workers=w, initializer=_init_worker, initargs=(fn, payload)
    ) as pool:
        return list(pool.map(_run_one, range(count), chunksize=chunk))
