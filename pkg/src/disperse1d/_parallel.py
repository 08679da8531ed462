"""Thread-pool helper honouring the DISPERSE1D_THREADS cap."""

import os
from concurrent.futures import ThreadPoolExecutor


def n_workers():
    try:
        cap = int(os.environ.get("DISPERSE1D_THREADS", "0"))
    except ValueError:
        cap = 0
    cpus = os.cpu_count() or 1
    return max(1, min(cap, cpus) if cap > 0 else cpus)


def pmap(fn, items):
    """Map ``fn`` over ``items``; results are returned in input order."""
    items = list(items)
    workers = min(n_workers(), len(items))
    if workers <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
