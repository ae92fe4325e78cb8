"""Semaphore-bounded fan-out of Monte Carlo path batches onto worker threads.

Batches are fixed by batch size, never by worker count, and results come back
in batch order, so reductions over them do not depend on scheduling.
"""
from concurrent.futures import ThreadPoolExecutor
from logging import Logger
from typing import Callable, List, Optional, TypeVar
import asyncio

import src.utils.logger  # registers Logger.progress

R = TypeVar("R")


def path_batches(n_paths: int, batch_size: int) -> List[range]:
    return [range(start, min(start + batch_size, n_paths)) for start in range(0, n_paths, batch_size)]


async def run_batches(batches: List[range],
                      work: Callable[[range], R],
                      max_workers: int = 1,
                      logger: Optional[Logger] = None,
                      label: str = "batch") -> List[R]:
    """Run ``work`` on every batch, at most ``max_workers`` at a time"""
    max_workers = max(1, max_workers)
    sem = asyncio.Semaphore(max_workers)
    loop = asyncio.get_running_loop()
    done = 0

    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        async def process_batch(index: int, batch: range) -> R:
            nonlocal done
            async with sem:
                result = await loop.run_in_executor(executor, work, batch)
            done += 1
            if logger:
                logger.progress(f"{label}: finished batch {index + 1} (paths {batch.start}-{batch.stop - 1}), "
                                f"{done}/{len(batches)} done")
            return result

        return await asyncio.gather(*[process_batch(i, b) for i, b in enumerate(batches)])
