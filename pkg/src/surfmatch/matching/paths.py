"""Single-source shortest paths over detector graphs (binary-heap Dijkstra)."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .._jit import njit


@njit
def _heap_push(hk, hv, size, key, val):
    i = size
    hk[i] = key
    hv[i] = val
    while i > 0:
        parent = (i - 1) >> 1
        if hk[parent] <= hk[i]:
            break
        hk[parent], hk[i] = hk[i], hk[parent]
        hv[parent], hv[i] = hv[i], hv[parent]
        i = parent
    return size + 1


@njit
def _heap_pop(hk, hv, size):
    size -= 1
    hk[0] = hk[size]
    hv[0] = hv[size]
    i = 0
    while True:
        left = 2 * i + 1
        if left >= size:
            break
        c = left
        if left + 1 < size and hk[left + 1] < hk[left]:
            c = left + 1
        if hk[i] <= hk[c]:
            break
        hk[c], hk[i] = hk[i], hk[c]
        hv[c], hv[i] = hv[i], hv[c]
        i = c
    return size


@njit
def dijkstra_kernel(ptr, nbr, eid, w, src, sink, targets, n_targets, dist, pred_edge):
    """Fill ``dist``/``pred_edge`` (pre-set to inf/-1) from ``src``.

    ``sink`` is settled but never expanded, so no path passes through it.
    With ``n_targets > 0`` the search stops once that many vertices flagged in
    ``targets`` are settled; their distances are then final.
    """
    cap = nbr.shape[0] + 1
    hk = np.empty(cap, np.float64)
    hv = np.empty(cap, np.int64)
    done = np.zeros(ptr.shape[0] - 1, np.bool_)
    dist[src] = 0.0
    size = _heap_push(hk, hv, 0, 0.0, src)
    found = 0
    while size > 0:
        d = hk[0]
        u = hv[0]
        size = _heap_pop(hk, hv, size)
        if done[u]:
            continue
        done[u] = True
        if targets[u]:
            found += 1
            if n_targets > 0 and found >= n_targets:
                break
        if u == sink and u != src:
            continue
        for idx in range(ptr[u], ptr[u + 1]):
            v = nbr[idx]
            nd = d + w[eid[idx]]
            if nd < dist[v]:
                dist[v] = nd
                pred_edge[v] = eid[idx]
                size = _heap_push(hk, hv, size, nd, v)


class ShortestPaths(NamedTuple):
    source: int
    dist: np.ndarray
    pred_edge: np.ndarray
    edge_u: np.ndarray
    edge_v: np.ndarray

    def predecessor(self, v: int) -> int:
        """Previous vertex on the shortest path to ``v`` (-1 at the source)."""
        e = self.pred_edge[v]
        if e < 0:
            return -1
        return int(self.edge_u[e] + self.edge_v[e] - v)

    def path_to(self, v: int) -> list[int]:
        """Edge ids from the source to ``v``, in walking order."""
        if not np.isfinite(self.dist[v]):
            raise ValueError(f"vertex {v} is unreachable from {self.source}")
        edges = []
        while v != self.source:
            e = int(self.pred_edge[v])
            edges.append(e)
            v = int(self.edge_u[e] + self.edge_v[e] - v)
        return edges[::-1]


def shortest_paths(graph, source: int, weights: np.ndarray | None = None) -> ShortestPaths:
    """Exact distances from ``source`` to every vertex of a detector graph.

    The boundary vertex is a sink: it can end a path but never relays one.
    Unreachable vertices keep an infinite distance.
    """
    if not 0 <= source < graph.n_vertices:
        raise ValueError(f"vertex {source} not in graph")
    w = graph.weights if weights is None else np.asarray(weights, dtype=np.float64)
    if np.any(w <= 0):
        raise ValueError("edge weights must be positive")
    ptr, nbr, eid = graph.adjacency
    dist = np.full(graph.n_vertices, np.inf)
    pred = np.full(graph.n_vertices, -1, np.int64)
    targets = np.zeros(graph.n_vertices, np.bool_)
    dijkstra_kernel(ptr, nbr, eid, w, source, graph.boundary, targets, 0, dist, pred)
    return ShortestPaths(source, dist, pred, graph.edge_u, graph.edge_v)
