import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from tqdm import tqdm

__all__ = ["thread_map", "default_threads"]

log = logging.getLogger("syntaxdist.parallel")

_T = TypeVar("_T")
_R = TypeVar("_R")


def default_threads() -> int:
    return os.cpu_count() or 1


def thread_map(
    func: Callable[[_T], _R],
    items: Iterable[_T],
    threads: Optional[int] = None,
    *,
    desc: Optional[str] = None,
) -> List[_R]:
    """Apply ``func`` to every item, possibly on a thread pool.

    Results come back in input order. With ``threads=1`` the calls run
    inline. A ``desc`` shows a progress bar on stderr when attached to a
    terminal.

    Parameters
    ----------
    func : Callable
        Called once per item.
    items : Iterable
        Inputs.
    threads : Optional[int]
        Worker count; ``None`` uses every available core.
    desc : Optional[str]
        Progress bar label.

    Returns
    -------
    list
        ``[func(item) for item in items]``.

    """
    items = list(items)
    if threads is None:
        threads = default_threads()
    with tqdm(
        total=len(items), desc=desc, disable=None if desc else True, leave=False, dynamic_ncols=True
    ) as progress_bar:
        if threads <= 1 or len(items) <= 1:
            results = []
            for item in items:
                results.append(func(item))
                progress_bar.update(1)
            return results

        log.debug("Mapping %s items over %s threads", len(items), threads)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(func, item) for item in items]
            results = []
            for future in futures:
                results.append(future.result())
                progress_bar.update(1)
        return results
