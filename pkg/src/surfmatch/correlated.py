"""Two-pass matching with correlation-driven edge reweighting.

Pass 1 matches both detector graphs independently. Every matched pair that is
joined by a single detector-graph edge (a unit match) is taken as evidence
that one of that edge's fault mechanisms happened. Mechanisms that also leave
a mark in the other basis make the corresponding other-basis edge more
likely, so its probability is raised before pass 2 re-matches from scratch.

Two update rules are available:

* ``RULE_PERFECT``: the linked edge gets probability 1/2 (perfect stabilizer
  measurement, where a unit match on a data qubit means X, Y or Z there was
  equally likely to be the Y that also flips the other basis).
* ``RULE_CONDITIONAL``: condition on the matched edge, giving source ``s`` the
  mass ``q_s = p_s / sum(p)`` over that edge's sources. The linked edge ``t``
  then becomes ``1 - (1 - p_t) * prod(1 - sum q)``, one factor per trigger.
  With ``replace=True`` the prior is dropped: ``1 - prod(1 - sum q)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._jit import njit
from .matching import JITTER_EPS, Matching, decode, jitter_key, jitter_weights
from .tracer import DetectorGraph

RULE_PERFECT = 0
RULE_CONDITIONAL = 1
P_CEILING = 1.0 - 1e-9


@njit
def reweight_kernel(units, src_total, link_ptr, link_edge, link_prob, target_p, rule, replace,
                    factor, stamp, acc, touched):
    """New probabilities of the other-basis edges linked to the unit-match edges.

    Scratch arrays are sized to the target graph: ``factor`` must hold 1.0,
    ``stamp`` -1 on entry and are restored before returning. Returns
    ``(n, new_p)`` with the target ids in ``touched[:n]``, in first-seen order.
    """
    n = 0
    for ui in range(units.shape[0]):
        e = units[ui]
        lo = link_ptr[e]
        hi = link_ptr[e + 1]
        if lo == hi:
            continue
        if src_total[e] <= 0.0:
            raise ValueError("matched edge has no sources")
        for li in range(lo, hi):
            t = link_edge[li]
            if stamp[t] == -1:
                touched[n] = t
                n += 1
            if stamp[t] != ui:
                stamp[t] = ui
                acc[t] = 0.0
            acc[t] += link_prob[li] / src_total[e]
        for li in range(lo, hi):
            t = link_edge[li]
            if stamp[t] == ui:
                stamp[t] = -2 - ui
                q = acc[t]
                if q > 1.0:
                    q = 1.0
                factor[t] *= 1.0 - q
    new_p = np.empty(n)
    for i in range(n):
        t = touched[i]
        if rule == RULE_PERFECT:
            p = 0.5
        elif replace:
            p = 1.0 - factor[t]
        else:
            p = 1.0 - (1.0 - target_p[t]) * factor[t]
        if p > P_CEILING:
            p = P_CEILING
        new_p[i] = p
        factor[t] = 1.0
        stamp[t] = -1
    return n, new_p


@njit
def unit_edges(partner, path_ptr, path_edges):
    """Edge ids of matched pairs whose path is exactly one edge."""
    k = partner.shape[0]
    out = np.empty(k, np.int64)
    n = 0
    for i in range(k):
        if path_ptr[i + 1] - path_ptr[i] == 1:
            out[n] = path_edges[path_ptr[i]]
            n += 1
    return out[:n]


@dataclass(frozen=True)
class UnitMatch:
    basis: str
    pair: tuple[int, int]
    edge: int


@dataclass(frozen=True)
class Reweight:
    basis: str
    edge: int
    p_edge: float
    triggers: tuple[int, ...]

    @property
    def weight(self) -> float:
        return -float(np.log(self.p_edge))


@dataclass(frozen=True)
class ReweightSet:
    """New edge probabilities for one detector graph, at most one entry per edge."""

    basis: str
    entries: tuple[Reweight, ...] = ()

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def apply(self, graph: DetectorGraph) -> np.ndarray:
        """Edge weights of ``graph`` with the new probabilities substituted."""
        if graph.basis != self.basis:
            raise ValueError(f"reweights target {self.basis}, graph is {graph.basis}")
        w = graph.weights.copy()
        for r in self.entries:
            w[r.edge] = r.weight
        return w


def find_unit_matches(matching: Matching, basis: str = "") -> list[UnitMatch]:
    """Pairs (including event-boundary pairs) matched through exactly one edge."""
    return [
        UnitMatch(basis, pair, path[0])
        for pair, path in zip(matching.pairs, matching.paths)
        if len(path) == 1
    ]


def _reweight(units, graph: DetectorGraph, other: DetectorGraph, rule: int, replace: bool) -> ReweightSet:
    edges = np.array([u.edge for u in units], np.int64)
    n_t = other.n_edges
    n, new_p = reweight_kernel(edges, graph.src_total, graph.link_ptr, graph.link_edge,
                               graph.link_prob, other.edge_p, rule, replace, np.ones(n_t),
                               np.full(n_t, -1, np.int64), np.zeros(n_t),
                               np.zeros(n_t, np.int64))
    entries = []
    for t, p in zip(_touched_order(edges, graph), new_p[:n].tolist()):
        trig = tuple(int(e) for e in edges if t in graph.link_edge[graph.link_ptr[e]:graph.link_ptr[e + 1]])
        entries.append(Reweight(other.basis, int(t), p, trig))
    return ReweightSet(other.basis, tuple(entries))


def _touched_order(edges, graph):
    seen = []
    for e in edges:
        for t in graph.link_edge[graph.link_ptr[e] : graph.link_ptr[e + 1]].tolist():
            if t not in seen:
                seen.append(t)
    return seen


def reweight_2d(units, graph: DetectorGraph, other: DetectorGraph) -> ReweightSet:
    """Perfect-measurement rule: every linked other-basis edge becomes p = 1/2."""
    return _reweight(units, graph, other, RULE_PERFECT, False)


def reweight_3d(units, graph: DetectorGraph, other: DetectorGraph, replace: bool = False) -> ReweightSet:
    """Conditional rule: linked edges absorb the matched edge's conditional source mass."""
    for u in units:
        if graph.src_ptr[u.edge + 1] == graph.src_ptr[u.edge]:
            raise RuntimeError(f"matched edge {u.edge} has no sources")
    return _reweight(units, graph, other, RULE_CONDITIONAL, replace)


@dataclass(frozen=True)
class CorrelatedResult:
    corrections: dict[str, np.ndarray]
    first_pass: dict[str, Matching]
    second_pass: dict[str, Matching]
    reweights: dict[str, ReweightSet]


def default_rule(graph: DetectorGraph) -> int:
    return RULE_PERFECT if graph.layers == 1 else RULE_CONDITIONAL


def correlated_decode(graph_x: DetectorGraph, graph_z: DetectorGraph, events_x, events_z,
                      rng_seed: int | None, rule: int | None = None,
                      replace: bool = False) -> CorrelatedResult:
    """Two matching passes over both graphs with symmetric reweighting in between.

    Both passes use the same jitter draw. A graph with no reweights keeps its
    pass-1 result untouched.
    """
    graphs = {"X": graph_x, "Z": graph_z}
    events = {"X": events_x, "Z": events_z}
    if rule is None:
        rule = default_rule(graph_x)
    first, corr = {}, {}
    for b, g in graphs.items():
        corr[b], first[b] = decode(g, events[b], rng_seed)
    sets = {}
    for b, g in graphs.items():
        o = "Z" if b == "X" else "X"
        units = find_unit_matches(first[b], b)
        if rule == RULE_PERFECT:
            sets[o] = reweight_2d(units, g, graphs[o])
        else:
            sets[o] = reweight_3d(units, g, graphs[o], replace)
    second = dict(first)
    for b, g in graphs.items():
        if len(sets[b]) == 0:
            continue
        w = sets[b].apply(g)
        if rng_seed is not None:
            # same jitter draw as pass 1; decode() then runs unjittered
            w = jitter_weights(w, jitter_key(rng_seed), JITTER_EPS)
        corr[b], second[b] = decode(g, events[b], None, weights=w)
    return CorrelatedResult(corr, first, second, sets)
