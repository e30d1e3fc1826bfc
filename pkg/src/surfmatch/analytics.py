"""Closed-form logical error estimates and exhaustive counting checks.

* ``split_count_ratio``: how much the minimum-weight failure patterns of a length-``n``
  path outnumber those with one extra error.
* ``pl_basic`` / ``pl_ideal``: leading-order logical error rate for even ``d``
  under independent matching (an X or Y on a site suffices, ``2p/3``) and
  under ideal correlation use (only X errors hurt, ``p/3``).
* ``census_no_odd_y_chain``: exhaustive count of X/Y strings on a path that
  contain no odd-length run of adjacent Y errors.
* ``count_two_event_paths``: path counting for two far-apart events on a distance-9
  lattice, and the error rate above which pairing them beats sending both to
  the boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from ._jit import njit

MAX_CENSUS_N = 24


def split_count_ratio(n: int) -> Fraction:
    """``C(n, ceil(n/2)) / C(n, ceil(n/2) + 1)`` as an exact fraction."""
    if n < 2:
        raise ValueError(f"ratio needs n >= 2 (the denominator vanishes at n = 1), got {n}")
    k = (n + 1) // 2
    return Fraction(math.comb(n, k), math.comb(n, k + 1))


def _check_even(d: int) -> None:
    if d < 2 or d % 2:
        raise ValueError(f"formula holds for even d >= 2, got d={d}")


def pl_basic(d: int, p: float) -> float:
    """``(d/2) C(d, d/2) (2p/3)^(d/2)``: leading-order rate with independent matching."""
    _check_even(d)
    h = d // 2
    return h * math.comb(d, h) * (2.0 * p / 3.0) ** h


def pl_ideal(d: int, p: float) -> float:
    """``(d/2) C(d, d/2) (p/3)^(d/2)``: leading-order rate if correlations were fully used."""
    _check_even(d)
    h = d // 2
    return h * math.comb(d, h) * (p / 3.0) ** h


@njit
def _no_odd_run(y):
    while y:
        y >>= _trailing_zeros(y)
        run = _trailing_zeros(~y)
        if run & 1:
            return False
        y >>= run
    return True


@njit
def _trailing_zeros(x):
    n = 0
    while (x & 1) == 0:
        x >>= 1
        n += 1
    return n


@njit
def _census_kernel(n, k):
    if k == 0:
        return 1, 1
    total = 0
    good = 0
    full = (1 << n) - 1
    # Gosper's hack: all n-bit masks with exactly k bits set
    s = (1 << k) - 1
    while s <= full:
        # every Y/X labelling is a submask (the Y sites) of s
        y = s
        while True:
            total += 1
            if _no_odd_run(y):
                good += 1
            if y == 0:
                break
            y = (y - 1) & s
        c = s & -s
        r = s + c
        s = (((r ^ s) >> 2) // c) | r
    return total, good


class CensusResult(NamedTuple):
    total: int
    no_odd_chain: int
    fraction: float


def census_no_odd_y_chain(n: int, k: int) -> CensusResult:
    """Count X/Y strings on ``k`` of ``n`` path sites with every Y run of even length.

    A Y run is a maximal set of Y-labelled sites that are consecutive along the
    path; an unoccupied site or an X breaks it. Strings without any Y count as
    having no odd run.
    """
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got n={n}, k={k}")
    if n > MAX_CENSUS_N:
        raise ValueError(f"exhaustive census limited to n <= {MAX_CENSUS_N}, got {n}")
    total, good = _census_kernel(np.int64(n), np.int64(k))
    return CensusResult(int(total), int(good), good / total)


@dataclass(frozen=True)
class TwoEventCounts:
    pair_length: int
    pair_paths: int
    boundary_length: int
    boundary_min: int
    boundary_next: int
    crossover: Fraction


# two events on the X-stabilizer lattice of a distance-9 code, given as
# (row index, column index) among the X stabilizers
EXAMPLE_D = 9
EXAMPLE_EVENTS = ((2, 2), (6, 5))


def _simple_path_counts(adj: dict[int, list[int]], start: int, stop: int, max_len: int,
                        relay_blocked: int) -> list[int]:
    """counts[L] = number of simple paths of length L from start to stop."""
    counts = [0] * (max_len + 1)
    seen = {start}

    def walk(v: int, length: int) -> None:
        if v == stop:
            counts[length] += 1
            return
        if length == max_len or (v == relay_blocked and v != start):
            return
        for u in adj[v]:
            if u not in seen:
                seen.add(u)
                walk(u, length + 1)
                seen.remove(u)

    walk(start, 0)
    return counts


def count_two_event_paths(d: int = EXAMPLE_D, events=EXAMPLE_EVENTS) -> TwoEventCounts:
    """Enumerate pair and boundary paths for the two-event example.

    Works on the unit-weight X-stabilizer graph of a distance-``d`` code under
    perfect measurement. Returns the number of minimum-length paths joining
    the events, the number of boundary matchings at the minimum total length
    and at one more, and the error rate where both options weigh the same.
    """
    from .layout import build_layout
    from .tracer import build_detector_graphs, perfect_sources

    graph = build_detector_graphs(perfect_sources(build_layout(d), 0.1))[0]
    adj: dict[int, list[int]] = {v: [] for v in range(graph.n_vertices)}
    for u, v in zip(graph.edge_u.tolist(), graph.edge_v.tolist()):
        adj[u].append(v)
        adj[v].append(u)
    sites = graph.stabilizer_sites
    ids = []
    for r, c in events:
        site = (2 * r, 2 * c + 1)
        if site not in sites:
            raise ValueError(f"no X stabilizer at index {(r, c)} for d={d}")
        ids.append(sites.index(site))
    a, b = ids
    bnd = graph.boundary
    # pair paths never pass through the boundary vertex
    manhattan = abs(events[0][0] - events[1][0]) + abs(events[0][1] - events[1][1])
    pair = _simple_path_counts(adj, a, b, manhattan, bnd)
    pair_len = next(i for i, c in enumerate(pair) if c)
    limit = d + 2
    ba = _simple_path_counts(adj, a, bnd, limit, bnd)
    bb = _simple_path_counts(adj, b, bnd, limit, bnd)
    joint = [sum(ba[i] * bb[L - i] for i in range(L + 1)) for L in range(limit + 1)]
    b_len = next(i for i, c in enumerate(joint) if c)
    n_pair, n_min, n_next = pair[pair_len], joint[b_len], joint[b_len + 1]
    if pair_len != b_len + 1:
        raise ValueError("crossover formula assumes pair paths are one step longer than boundary matchings")
    # n_pair p^(L+1) = n_min p^L + n_next p^(L+1)  ->  p = n_min / (n_pair - n_next)
    crossover = Fraction(n_min, n_pair - n_next)
    return TwoEventCounts(pair_len, n_pair, b_len, n_min, n_next, crossover)
