import asyncio
import contextvars
import functools
import os
from concurrent.futures import ThreadPoolExecutor
from threading import Thread
from typing import Callable, Iterable, TypeVar

import structlog

T = TypeVar("T")
R = TypeVar("R")


class LoopOnThread(Thread):
    def __init__(self) -> None:
        """
        Sweeps over configurations are independent so they can be spread over a thread pool; numpy releases the GIL for the FFT work.
        The pool is driven from an event loop on this daemon Thread so callers only block on the gathered result.
        """

        self._loop = asyncio.new_event_loop()
        """A separate event loop serviced by this Thread"""

        self._executors: dict[int, ThreadPoolExecutor] = {}
        self._logger = structlog.getLogger(self.__class__.__name__)

        # It's important it's a daemon so the app closes
        super().__init__(
            None,
            self._run_loop_forever,
            LoopOnThread.__name__,
            daemon=True,
        )

    @property
    def loop(self) -> asyncio.AbstractEventLoop:
        return self._loop

    @staticmethod
    def configured_workers() -> int:
        try:
            return max(1, int(os.environ.get("TMASIM_WORKERS", "1")))
        except ValueError:
            structlog.getLogger(LoopOnThread.__name__).warning("Ignoring TMASIM_WORKERS, it is not an integer", value=os.environ.get("TMASIM_WORKERS"))
            return 1

    def _run_loop_forever(self):
        """Associate the event loop with the thread we've created for it and run the loop so it can process tasks"""
        asyncio.set_event_loop(self._loop)
        self._loop.run_forever()

    def _executor_for(self, workers: int) -> ThreadPoolExecutor:
        """One pool per worker count, created on first use"""
        if workers not in self._executors:
            self._executors[workers] = ThreadPoolExecutor(max_workers=workers, thread_name_prefix=f"sweep{workers}")
        return self._executors[workers]

    async def _gather(self, func: Callable[[T], R], items: list[T], executor: ThreadPoolExecutor, context: contextvars.Context) -> list[R]:
        # a Context can only be entered by one thread at a time, so every item gets its own copy;
        # gather keeps submission order regardless of completion order
        return await asyncio.gather(*[self._loop.run_in_executor(executor, functools.partial(context.copy().run, func, item)) for item in items])

    def ordered_map(self, func: Callable[[T], R], items: Iterable[T], workers: int | None = None) -> list[R]:
        """Evaluate func on every item, results in the order of items; the caller's structlog context is carried into the pool"""
        items = list(items)
        if workers is None:
            workers = LoopOnThread.configured_workers()

        if workers <= 1 or len(items) <= 1:
            return [func(item) for item in items]

        executor = self._executor_for(workers)
        if not self.is_alive():
            self.start()

        self._logger.debug("Parallel sweep", items=len(items), workers=workers)
        return asyncio.run_coroutine_threadsafe(self._gather(func, items, executor, contextvars.copy_context()), self._loop).result()


# Global state
sweep_daemon = LoopOnThread()
"""A separate event loop for fanning sweeps out over a thread pool"""
