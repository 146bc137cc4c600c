"""Kernel backend selection and the threaded row driver.

At import time the compiled kernels (``assignflow._flow_cy``) are
preferred and the NumPy fallback (``assignflow._flow_py``) is used when
the extension is unavailable.  ``ASSIGNFLOW_BACKEND=python|compiled``
overrides the choice.

All kernels fill disjoint row ranges of preallocated outputs, so
:func:`run_rows` can split the work across a thread pool.  The worker
count is read from ``ASSIGNFLOW_THREADS`` on every call (default: the
machine's CPU count); results are bit-identical for every worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

from . import _flow_py

try:
    from . import _flow_cy
except ImportError:
    _flow_cy = None

_BACKENDS = {"python": _flow_py}
if _flow_cy is not None:
    _BACKENDS["compiled"] = _flow_cy


def get_kernels(name: str | None = None):
    """Kernel module for an explicit backend name, or the selected default."""
    if name is None:
        return kernels
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(
            f"backend {name!r} not available (have: {sorted(_BACKENDS)})"
        ) from None


_requested = os.environ.get("ASSIGNFLOW_BACKEND")
if _requested:
    kernels = get_kernels(_requested)
else:
    kernels = _BACKENDS.get("compiled", _flow_py)

BACKEND_NAME = "compiled" if kernels is _flow_cy else "python"
HAVE_COMPILED = _flow_cy is not None


def worker_count() -> int:
    raw = os.environ.get("ASSIGNFLOW_THREADS", "").strip()
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ValueError(f"ASSIGNFLOW_THREADS must be an integer, got {raw!r}")
    return os.cpu_count() or 1


_pools: dict[int, ThreadPoolExecutor] = {}


def _pool(size: int) -> ThreadPoolExecutor:
    pool = _pools.get(size)
    if pool is None:
        pool = _pools[size] = ThreadPoolExecutor(max_workers=size)
    return pool


def run_rows(fn, n_rows: int, *args) -> None:
    """Invoke fn(*args, r0, r1) over [0, n_rows), possibly in parallel.

    fn must only write rows [r0, r1) of its output argument; inputs are
    shared read-only.  Partitioning cannot change the result.
    """
    workers = min(worker_count(), n_rows)
    if workers <= 1:
        fn(*args, 0, n_rows)
        return
    step = (n_rows + workers - 1) // workers
    bounds = [(a, min(a + step, n_rows)) for a in range(0, n_rows, step)]
    futures = [_pool(workers).submit(fn, *args, a, b) for a, b in bounds]
    for fut in futures:
        fut.result()
