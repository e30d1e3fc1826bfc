"""Exhaustive minimum-weight perfect matching for small instances."""

from __future__ import annotations

import math

import numpy as np

MAX_BRUTE_NODES = 12


def brute_force_mwpm(weights) -> tuple[list[tuple[int, int]], float]:
    """Enumerate every perfect matching of a complete graph.

    ``weights`` is a symmetric ``(n, n)`` array; ``inf`` marks a missing edge.
    Returns ``(pairs, total)`` for a lightest perfect matching, pairs sorted.
    """
    w = np.asarray(weights, dtype=float)
    n = w.shape[0]
    if w.shape != (n, n):
        raise ValueError("weight matrix must be square")
    if n % 2:
        raise ValueError("perfect matching needs an even number of nodes")
    if n > MAX_BRUTE_NODES:
        raise ValueError(f"brute force limited to {MAX_BRUTE_NODES} nodes, got {n}")

    best_total = math.inf
    best: list[tuple[int, int]] = []
    pairs: list[tuple[int, int]] = []

    def rec(free: list[int], total: float) -> None:
        nonlocal best_total, best
        if total >= best_total:
            return
        if not free:
            best_total = total
            best = list(pairs)
            return
        a = free[0]
        for i in range(1, len(free)):
            b = free[i]
            if math.isinf(w[a, b]):
                continue
            pairs.append((a, b))
            rec(free[1:i] + free[i + 1 :], total + w[a, b])
            pairs.pop()

    rec(list(range(n)), 0.0)
    if math.isinf(best_total):
        raise ValueError("graph has no perfect matching")
    return sorted(best), best_total
