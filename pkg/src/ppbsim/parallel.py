"""Ordered, stop-aware batch execution.

Batches are evaluated in index order (or speculatively in waves across a
process pool) and folded strictly in index order, so the outcome does not
depend on the worker count.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, TypeVar

T = TypeVar("T")


def run_ordered(task: Callable[[int], T], done: Callable[[list[T]], bool], workers: int = 1,
                executor: ProcessPoolExecutor | None = None) -> list[T]:
    results: list[T] = []
    if workers <= 1 and executor is None:
        i = 0
        while not done(results):
            results.append(task(i))
            i += 1
        return results

    own = executor is None
    ex = executor or ProcessPoolExecutor(max_workers=workers)
    try:
        i = 0
        while not done(results):
            futures = [ex.submit(task, j) for j in range(i, i + workers)]
            i += workers
            for k, fut in enumerate(futures):
                results.append(fut.result())
                if done(results):
                    for rest in futures[k + 1:]:
                        rest.cancel()
                    break
        return results
    finally:
        if own:
            ex.shutdown(wait=True, cancel_futures=True)
