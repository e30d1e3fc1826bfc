"""Minimum-weight perfect matching decoder over detector graphs.

Detection events are contracted to a complete syndrome graph: event-event
weights are shortest-path distances, each event also has a private boundary
companion at its distance to the boundary, and companions are joined to one
another at zero cost so the matching is always perfect. Matched pairs are
expanded back into detector-graph edge paths whose XOR is the correction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .._jit import njit
from ..rng import JITTER_SALT, as_seed, hashed_uniform, trial_state
from .blossom import max_weight_matching
from .brute import brute_force_mwpm
from .paths import dijkstra_kernel

JITTER_EPS = 1e-6
# integer resolution used when handing float weights to the blossom solver
_WEIGHT_BITS = 40


@njit
def jitter_weights(w, key, eps):
    """Multiply edge ``e``'s weight by ``1 + eps * u_e`` with ``u_e`` keyed on ``(key, e)``."""
    out = np.empty_like(w)
    for e in range(w.shape[0]):
        out[e] = w[e] * (1.0 + eps * hashed_uniform(key, e))
    return out


def jitter_key(seed: int, trial: int = 0) -> np.uint64:
    """Key of the jitter stream for one trial of a run seeded with ``seed``."""
    return np.uint64(trial_state(as_seed(seed), trial, JITTER_SALT))


@njit
def _integer_weights(wf):
    maxw = 0.0
    for i in range(wf.shape[0]):
        if wf[i] > maxw:
            maxw = wf[i]
    scale = 1.0
    if maxw > 0:
        scale = float(2**_WEIGHT_BITS) / maxw
    wi = np.empty(wf.shape[0], np.int64)
    for i in range(wf.shape[0]):
        wi[i] = np.int64(np.rint(wf[i] * scale))
    return wi


@njit
def min_weight_perfect_matching(n, eu, ev, wf):
    """Mate array of a minimum-weight perfect matching, or all -1 if none exists."""
    wi = _integer_weights(wf)
    top = 0
    for i in range(wi.shape[0]):
        if wi[i] > top:
            top = wi[i]
    ew = (top + 1) - wi
    mate = max_weight_matching(n, eu, ev, ew, True)
    for v in range(n):
        if mate[v] < 0:
            mate[:] = -1
            break
    return mate


@njit
def syndrome_distances(ptr, nbr, eid, w, boundary, events):
    """Event-event and event-boundary distances plus per-event predecessor edges."""
    k = events.shape[0]
    nv = ptr.shape[0] - 1
    targets = np.zeros(nv, np.bool_)
    for i in range(k):
        targets[events[i]] = True
    targets[boundary] = True
    dist_ev = np.empty((k, k))
    dist_b = np.empty(k)
    pred = np.full((k, nv), -1, np.int64)
    dist = np.empty(nv)
    for i in range(k):
        dist[:] = np.inf
        dijkstra_kernel(ptr, nbr, eid, w, events[i], boundary, targets, k + 1, dist, pred[i])
        for j in range(k):
            dist_ev[i, j] = dist[events[j]]
        dist_b[i] = dist[boundary]
    return dist_ev, dist_b, pred


@njit
def _syndrome_edges(dist_ev, dist_b):
    k = dist_b.shape[0]
    m = k * (k - 1) + k
    eu = np.empty(m, np.int64)
    ev = np.empty(m, np.int64)
    wf = np.empty(m)
    c = 0
    for i in range(k):
        for j in range(i + 1, k):
            if np.isfinite(dist_ev[i, j]):
                eu[c] = i
                ev[c] = j
                wf[c] = dist_ev[i, j]
                c += 1
        if np.isfinite(dist_b[i]):
            eu[c] = i
            ev[c] = k + i
            wf[c] = dist_b[i]
            c += 1
        for j in range(i + 1, k):
            eu[c] = k + i
            ev[c] = k + j
            wf[c] = 0.0
            c += 1
    return eu[:c], ev[:c], wf[:c]


# event sets up to this size are matched by an exact subset recursion
SMALL_EVENTS = 10


@njit
def subset_mate(dist_ev, dist_b):
    """Exact minimum-weight syndrome matching by recursion over event subsets.

    Each event pairs with another event or with the boundary; leftover
    boundary companions pair among themselves at zero cost, which is the
    same optimum the blossom finds on the companion graph. Returns the mate
    array over the ``2k`` syndrome-graph nodes, all -1 when infeasible.
    """
    k = dist_b.shape[0]
    full = (1 << k) - 1
    best = np.full(full + 1, np.inf)
    pick = np.full(full + 1, -1, np.int64)
    best[0] = 0.0
    for s in range(1, full + 1):
        i = 0
        while not (s >> i) & 1:
            i += 1
        rest = s & ~(1 << i)
        cand = best[rest] + dist_b[i]
        if cand < best[s]:
            best[s] = cand
            pick[s] = i
        for j in range(i + 1, k):
            if (rest >> j) & 1:
                cand = best[rest & ~(1 << j)] + dist_ev[i, j]
                if cand < best[s]:
                    best[s] = cand
                    pick[s] = j
    mate = np.full(2 * k, -1, np.int64)
    if not np.isfinite(best[full]):
        return mate
    s = full
    spare = -1
    while s:
        i = 0
        while not (s >> i) & 1:
            i += 1
        j = pick[s]
        if j == i:
            mate[i] = k + i
            mate[k + i] = i
            s &= ~(1 << i)
        else:
            mate[i] = j
            mate[j] = i
            s &= ~((1 << i) | (1 << j))
    # unused companions pair off at zero cost
    for c in range(k, 2 * k):
        if mate[c] >= 0:
            continue
        if spare < 0:
            spare = c
        else:
            mate[c] = spare
            mate[spare] = c
            spare = -1
    return mate


@njit
def match_kernel(ptr, nbr, eid, w, edge_u, edge_v, boundary, events):
    """Decode one event set.

    Returns ``(partner, pair_weight, path_ptr, path_edges)`` indexed by event:
    ``partner[i]`` is the matched event index or -1 for the boundary;
    each pair's path is stored under its lower event index (and under ``i``
    for boundary matches), walking from the partner back to event ``i``.
    """
    k = events.shape[0]
    partner = np.full(k, -1, np.int64)
    pair_weight = np.zeros(k)
    path_ptr = np.zeros(k + 1, np.int64)
    if k == 0:
        return partner, pair_weight, path_ptr, np.zeros(0, np.int64)
    dist_ev, dist_b, pred = syndrome_distances(ptr, nbr, eid, w, boundary, events)
    if k <= SMALL_EVENTS:
        mate = subset_mate(dist_ev, dist_b)
    else:
        eu, ev, wf = _syndrome_edges(dist_ev, dist_b)
        mate = min_weight_perfect_matching(2 * k, eu, ev, wf)
    if mate[0] < 0:
        raise ValueError("event set has no perfect matching in this graph")
    for i in range(k):
        partner[i] = mate[i] if mate[i] < k else -1
    # path lengths first, then fill
    lengths = np.zeros(k, np.int64)
    for i in range(k):
        j = partner[i]
        if j >= 0 and j < i:
            continue
        target = boundary if j < 0 else events[j]
        v = target
        n = 0
        while v != events[i]:
            e = pred[i, v]
            v = edge_u[e] + edge_v[e] - v
            n += 1
        lengths[i] = n
        pair_weight[i] = dist_b[i] if j < 0 else dist_ev[i, j]
    for i in range(k):
        path_ptr[i + 1] = path_ptr[i] + lengths[i]
    path_edges = np.empty(path_ptr[k], np.int64)
    for i in range(k):
        if lengths[i] == 0:
            continue
        j = partner[i]
        v = boundary if j < 0 else events[j]
        c = path_ptr[i]
        while v != events[i]:
            e = pred[i, v]
            path_edges[c] = e
            c += 1
            v = edge_u[e] + edge_v[e] - v
    return partner, pair_weight, path_ptr, path_edges


@njit
def correction_parity(path_edges, edge_flip):
    """Logical flip implemented by the XOR of the given edges."""
    f = 0
    for i in range(path_edges.shape[0]):
        f ^= edge_flip[path_edges[i]]
    return f


@dataclass(frozen=True)
class Matching:
    """Perfect matching of a syndrome graph.

    ``pairs`` hold node indices; when produced by :func:`decode`, node ``i < k``
    is the ``i``-th event and ``-1`` marks a boundary companion. ``paths``
    give the detector-graph edges of each pair (empty for raw matchings).
    """

    pairs: tuple[tuple[int, int], ...]
    total_weight: float
    paths: tuple[tuple[int, ...], ...] = ()
    events: tuple[int, ...] = ()

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class SyndromeGraph:
    """Complete graph on events and their boundary companions.

    Nodes ``0..k-1`` are the events, ``k..2k-1`` their companions. ``paths``
    maps each event-event or event-companion edge to detector-graph edges.
    """

    events: tuple[int, ...]
    weights: np.ndarray
    paths: dict[tuple[int, int], tuple[int, ...]]

    @property
    def n_nodes(self) -> int:
        return 2 * len(self.events)

    def to_json(self) -> str:
        k = len(self.events)
        edges = []
        for i in range(self.n_nodes):
            for j in range(i + 1, self.n_nodes):
                wij = float(self.weights[i, j])
                if not np.isfinite(wij):
                    continue
                edges.append({"u": i, "v": j, "weight": wij, "path": list(self.paths.get((i, j), ()))})
        return json.dumps({"events": list(self.events), "companions": list(range(k, 2 * k)), "edges": edges})


def _event_vertices(graph, events) -> np.ndarray:
    if hasattr(events, "vertices"):
        ev = events.vertices(graph.basis, graph.n_stabilizers)
    else:
        ev = np.asarray(events, dtype=np.int64).reshape(-1)
    ev = np.asarray(ev, dtype=np.int64)
    if ev.size and (ev.min() < 0 or ev.max() >= graph.boundary):
        bad = ev[(ev < 0) | (ev >= graph.boundary)][0]
        raise ValueError(f"event on unknown vertex {bad}")
    if len(np.unique(ev)) != len(ev):
        raise ValueError("duplicate detection events")
    return ev


def _walk(pred_row, edge_u, edge_v, start, stop):
    edges = []
    v = stop
    while v != start:
        e = int(pred_row[v])
        edges.append(e)
        v = int(edge_u[e] + edge_v[e] - v)
    return tuple(edges)


def build_syndrome_graph(graph, events, weights: np.ndarray | None = None) -> SyndromeGraph:
    ev = _event_vertices(graph, events)
    w = graph.weights if weights is None else np.asarray(weights, dtype=np.float64)
    ptr, nbr, eid = graph.adjacency
    k = len(ev)
    dist_ev, dist_b, pred = syndrome_distances(ptr, nbr, eid, w, graph.boundary, ev)
    full = np.full((2 * k, 2 * k), np.inf)
    paths = {}
    for i in range(k):
        for j in range(i + 1, k):
            full[i, j] = full[j, i] = dist_ev[i, j]
            if np.isfinite(dist_ev[i, j]):
                paths[(i, j)] = _walk(pred[i], graph.edge_u, graph.edge_v, ev[i], ev[j])
        full[i, k + i] = full[k + i, i] = dist_b[i]
        if np.isfinite(dist_b[i]):
            paths[(i, k + i)] = _walk(pred[i], graph.edge_u, graph.edge_v, ev[i], graph.boundary)
        for j in range(i + 1, k):
            full[k + i, k + j] = full[k + j, k + i] = 0.0
    full.setflags(write=False)
    return SyndromeGraph(tuple(ev.tolist()), full, paths)


def _check_matrix(weights) -> np.ndarray:
    w = np.asarray(weights, dtype=np.float64)
    n = w.shape[0]
    if w.ndim != 2 or w.shape != (n, n):
        raise ValueError("weight matrix must be square")
    if n % 2:
        raise ValueError(f"perfect matching needs an even node count, got {n}")
    if not np.array_equal(w, w.T):
        raise ValueError("weight matrix must be symmetric")
    return w


def mwpm(weights) -> Matching:
    """Exact minimum-weight perfect matching of a complete weighted graph.

    ``weights[i, j]`` is the cost of pairing ``i`` with ``j``; ``inf`` entries
    are treated as absent edges. Diagonal entries are ignored.
    """
    w = _check_matrix(weights)
    n = w.shape[0]
    if n == 0:
        return Matching((), 0.0)
    iu, ju = np.triu_indices(n, 1)
    keep = np.isfinite(w[iu, ju])
    iu, ju = iu[keep].astype(np.int64), ju[keep].astype(np.int64)
    mate = min_weight_perfect_matching(n, iu, ju, w[iu, ju].astype(np.float64))
    if mate[0] < 0:
        raise ValueError("graph has no perfect matching")
    pairs = tuple((i, int(mate[i])) for i in range(n) if i < mate[i])
    return Matching(pairs, float(sum(w[a, b] for a, b in pairs)))


def brute_force_matching(weights) -> Matching:
    pairs, total = brute_force_mwpm(_check_matrix(weights))
    return Matching(tuple(pairs), total)


def decode(graph, events, rng_seed: int | None, weights: np.ndarray | None = None,
           eps: float = JITTER_EPS) -> tuple[np.ndarray, Matching]:
    """Match detection events and return ``(correction edge ids, Matching)``.

    ``events`` is a :class:`~surfmatch.circuit.SyndromeInstance` or a sequence
    of vertex ids. Edge weights default to ``-ln p``; when ``rng_seed`` is
    given every edge weight is scaled by ``1 + eps * u`` with ``u`` drawn from
    that seed, so degenerate matchings are chosen uniformly at random.
    """
    ev = _event_vertices(graph, events)
    w = graph.weights if weights is None else np.asarray(weights, dtype=np.float64)
    if rng_seed is not None and eps > 0:
        w = jitter_weights(w, jitter_key(rng_seed), eps)
    ptr, nbr, eid = graph.adjacency
    partner, pw, pptr, pedges = match_kernel(ptr, nbr, eid, w, graph.edge_u, graph.edge_v,
                                             graph.boundary, ev)
    pairs, paths, total = [], [], 0.0
    for i in range(len(ev)):
        j = int(partner[i])
        if 0 <= j < i:
            continue
        pairs.append((i, j))
        paths.append(tuple(pedges[pptr[i] : pptr[i + 1]].tolist()))
        total += float(pw[i])
    counts = np.bincount(pedges, minlength=graph.n_edges) if pedges.size else np.zeros(graph.n_edges, np.int64)
    correction = np.flatnonzero(counts & 1)
    return correction, Matching(tuple(pairs), total, tuple(paths), tuple(ev.tolist()))
