"""Ordered work pool: results come back in input order regardless of threads."""

from concurrent.futures import ThreadPoolExecutor


def ordered_map(fn, items, threads=1):
    items = list(items)
    if threads is None or threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
