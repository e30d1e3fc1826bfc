"""Single-fault tracing and detector-graph assembly.

Every channel outcome of every noisy gate is propagated on its own to find
which detection events it causes in the two matching problems. Sources that
hit the same pair of detection sites are merged into one graph edge whose
probability is the independent-OR of theirs. A source with components in both
problems lands on one edge of each graph; those pairs are the correlation
links used by the second matching pass.

Graph naming follows the stabilizer type whose events it holds: the ``"Z"``
graph collects Z-stabilizer events, so it locates X errors and decides
logical X failure; the ``"X"`` graph locates Z errors.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .circuit import (
    CHANNEL_OUTCOMES,
    Circuit,
    NoiseModel,
    event_layers,
    fault_from_outcome,
    outcome_codes,
    trace_kernel,
)
from .layout import CodeLayout, PauliTerm

BASES = ("X", "Z")


def other(basis: str) -> str:
    return "Z" if basis == "X" else "X"


@dataclass(frozen=True)
class ErrorSource:
    gate: int
    paulis: tuple[PauliTerm, ...]
    probability: float
    x_endpoints: tuple[int, ...]
    z_endpoints: tuple[int, ...]
    x_flip: bool
    z_flip: bool


@dataclass(frozen=True, eq=False)
class SourceTable:
    """Column-oriented table of single-fault mechanisms.

    ``ends[b]`` has shape (S, 2): graph-``b`` vertex ids hit by each source,
    padded with -1; the boundary vertex stands in for a missing partner.
    ``flip[b]`` marks sources that toggle the logical observable checked by
    graph ``b``.
    """

    gate: np.ndarray
    outcome: np.ndarray
    prob: np.ndarray
    ends: dict[str, np.ndarray]
    flip: dict[str, np.ndarray]
    n_stabilizers: dict[str, int]
    layers: int
    layout: CodeLayout = field(repr=False)
    circuit: Circuit | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.gate)

    def boundary(self, basis: str) -> int:
        return self.n_stabilizers[basis] * self.layers

    def __getitem__(self, i: int) -> ErrorSource:
        if self.circuit is not None:
            paulis = fault_from_outcome(self.circuit, int(self.gate[i]), int(self.outcome[i])).paulis
        else:
            paulis = ((PauliTerm.X, PauliTerm.Y, PauliTerm.Z)[int(self.outcome[i])],)

        def ends(b):
            return tuple(int(v) for v in self.ends[b][i] if v >= 0)

        return ErrorSource(
            gate=int(self.gate[i]),
            paulis=paulis,
            probability=float(self.prob[i]),
            x_endpoints=ends("X"),
            z_endpoints=ends("Z"),
            x_flip=bool(self.flip["X"][i]),
            z_flip=bool(self.flip["Z"][i]),
        )

    def events(self, basis: str) -> np.ndarray:
        """Like ``ends`` but with the boundary vertex masked to -1."""
        e = self.ends[basis].copy()
        e[e == self.boundary(basis)] = -1
        return e


def _endpoints(event_matrix: np.ndarray, boundary: int) -> np.ndarray:
    """(S, V) event indicator -> (S, 2) endpoint ids."""
    counts = event_matrix.sum(axis=1)
    if counts.size and counts.max() > 2:
        bad = int(np.argmax(counts))
        raise RuntimeError(f"source {bad} produces {counts[bad]} detection events in one basis")
    out = np.full((event_matrix.shape[0], 2), -1, np.int64)
    rows, cols = np.nonzero(event_matrix)
    first = np.ones(len(rows), bool)
    first[1:] = rows[1:] != rows[:-1]
    out[rows[first], 0] = cols[first]
    out[rows[~first], 1] = cols[~first]
    single = counts == 1
    out[single, 1] = boundary
    return out


def perfect_sources(layout: CodeLayout, p: float) -> SourceTable:
    """Sources for perfect stabilizer measurement: X, Y, Z with p/3 on each data qubit."""
    if not 0.0 <= p < 1.0:
        raise ValueError(f"p must lie in [0, 1), got {p}")
    nd = layout.n_data
    if p == 0.0:
        nd = 0
    qubits = np.repeat(np.arange(nd), 3)
    outcome = np.tile(np.arange(3), nd)
    codes = np.array([PauliTerm.X.value, PauliTerm.Y.value, PauliTerm.Z.value])[outcome]
    xcomp = (codes & 1).astype(np.uint8)
    zcomp = ((codes >> 1) & 1).astype(np.uint8)
    hx = layout.x_checks[:, qubits].T * zcomp[:, None]
    hz = layout.z_checks[:, qubits].T * xcomp[:, None]
    lx = np.zeros(layout.n_data, np.uint8)
    lx[list(layout.logical_x_support)] = 1
    lz = np.zeros(layout.n_data, np.uint8)
    lz[list(layout.logical_z_support)] = 1
    nxs, nzs = len(layout.x_stabilizers), len(layout.z_stabilizers)
    return SourceTable(
        gate=qubits.astype(np.int64),
        outcome=outcome.astype(np.int64),
        prob=np.full(len(qubits), p / 3.0),
        ends={"X": _endpoints(hx, nxs), "Z": _endpoints(hz, nzs)},
        flip={"X": zcomp & lx[qubits], "Z": xcomp & lz[qubits]},
        n_stabilizers={"X": nxs, "Z": nzs},
        layers=1,
        layout=layout,
    )


def trace_all_single_faults(circuit: Circuit, noise: NoiseModel, layout: CodeLayout) -> SourceTable:
    """One entry per (noisy gate, channel outcome), each propagated in isolation."""
    kind, q0, q1, slot, noisy = circuit.arrays
    gates = np.flatnonzero(noisy) if noise.p > 0 else np.zeros(0, np.int64)
    n_out = CHANNEL_OUTCOMES[kind[gates]]
    src_gate = np.repeat(gates, n_out).astype(np.int64)
    starts = np.cumsum(n_out) - n_out
    src_out = (np.arange(len(src_gate)) - np.repeat(starts, n_out)).astype(np.int64)
    codes = np.array([outcome_codes(int(kind[g]), int(o)) for g, o in zip(src_gate, src_out)], np.int64)
    codes = codes.reshape(-1, 2)
    recs, fxs, fzs = trace_kernel(
        kind, q0, q1, slot, circuit.n_qubits, circuit.n_slots, src_gate, codes[:, 0], codes[:, 1]
    )
    nd = layout.n_data
    nxs, nzs = len(layout.x_stabilizers), len(layout.z_stabilizers)
    rounds = circuit.rounds
    body = recs[:, : rounds * (nxs + nzs)].reshape(-1, rounds, nxs + nzs)
    fx, fz = fxs[:, :nd].astype(np.int64), fzs[:, :nd].astype(np.int64)
    final_x = ((fz @ layout.x_checks.T.astype(np.int64)) & 1).astype(np.uint8)
    final_z = ((fx @ layout.z_checks.T.astype(np.int64)) & 1).astype(np.uint8)
    layers = rounds + 1
    ev_x = event_layers(body[:, :, :nxs], final_x).reshape(len(src_gate), nxs * layers)
    ev_z = event_layers(body[:, :, nxs:], final_z).reshape(len(src_gate), nzs * layers)
    flip_z = (fx[:, list(layout.logical_z_support)].sum(axis=1) & 1).astype(np.uint8)
    flip_x = (fz[:, list(layout.logical_x_support)].sum(axis=1) & 1).astype(np.uint8)
    prob = np.array([noise.p / n for n in np.repeat(n_out, n_out)], np.float64)
    return SourceTable(
        gate=src_gate,
        outcome=src_out,
        prob=prob,
        ends={"X": _endpoints(ev_x, nxs * layers), "Z": _endpoints(ev_z, nzs * layers)},
        flip={"X": flip_x, "Z": flip_z},
        n_stabilizers={"X": nxs, "Z": nzs},
        layers=layers,
        layout=layout,
        circuit=circuit,
    )


def _freeze(*arrays):
    for a in arrays:
        a.setflags(write=False)


@dataclass(frozen=True, eq=False)
class DetectorGraph:
    """Weighted matching graph for one basis; the last vertex is the boundary.

    Edge ``e`` joins ``edge_u[e]``/``edge_v[e]`` with probability ``edge_p[e]``.
    ``src_ptr``/``src_ids`` list the sources merged into each edge and
    ``src_total`` their summed probability. ``link_ptr``/``link_edge``/
    ``link_prob`` give, for each edge, the other-basis edges reached by its
    two-component sources together with those sources' probabilities.
    """

    basis: str
    n_vertices: int
    layers: int
    n_stabilizers: int
    stabilizer_sites: tuple[tuple[int, int], ...]
    edge_u: np.ndarray
    edge_v: np.ndarray
    edge_p: np.ndarray
    edge_flip: np.ndarray
    src_ptr: np.ndarray
    src_ids: np.ndarray
    src_total: np.ndarray
    link_ptr: np.ndarray
    link_edge: np.ndarray
    link_prob: np.ndarray

    def __post_init__(self):
        _freeze(self.edge_u, self.edge_v, self.edge_p, self.edge_flip, self.src_ptr,
                self.src_ids, self.src_total, self.link_ptr, self.link_edge, self.link_prob)

    @property
    def boundary(self) -> int:
        return self.n_vertices - 1

    @property
    def n_detectors(self) -> int:
        return self.n_vertices - 1

    @property
    def n_edges(self) -> int:
        return len(self.edge_u)

    @cached_property
    def weights(self) -> np.ndarray:
        w = -np.log(self.edge_p)
        w.setflags(write=False)
        return w

    @cached_property
    def adjacency(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """CSR (ptr, neighbour, edge id)."""
        n = self.n_vertices
        ends = np.concatenate([self.edge_u, self.edge_v])
        nbrs = np.concatenate([self.edge_v, self.edge_u])
        eids = np.concatenate([np.arange(self.n_edges)] * 2)
        order = np.argsort(ends, kind="stable")
        ptr = np.zeros(n + 1, np.int64)
        np.add.at(ptr, ends + 1, 1)
        ptr = np.cumsum(ptr)
        return ptr, nbrs[order].astype(np.int64), eids[order].astype(np.int64)

    @cached_property
    def edge_index(self) -> dict[tuple[int, int], int]:
        return {
            (min(u, v), max(u, v)): e
            for e, (u, v) in enumerate(zip(self.edge_u.tolist(), self.edge_v.tolist()))
        }

    def edge_between(self, u: int, v: int) -> int:
        return self.edge_index[(min(u, v), max(u, v))]

    def vertex(self, stabilizer: int, layer: int = 0) -> int:
        return layer * self.n_stabilizers + stabilizer

    def vertex_site(self, v: int) -> tuple[int, int, int] | None:
        if v == self.boundary:
            return None
        layer, s = divmod(v, self.n_stabilizers)
        r, c = self.stabilizer_sites[s]
        return r, c, layer

    def sources_of(self, e: int) -> np.ndarray:
        return self.src_ids[self.src_ptr[e] : self.src_ptr[e + 1]]

    def links_of(self, e: int) -> list[tuple[int, float]]:
        sl = slice(self.link_ptr[e], self.link_ptr[e + 1])
        return list(zip(self.link_edge[sl].tolist(), self.link_prob[sl].tolist()))


def _group_edges(sources: SourceTable, basis: str):
    ends = sources.ends[basis]
    live = np.flatnonzero(ends[:, 0] >= 0)
    dead_flip = np.flatnonzero((ends[:, 0] < 0) & (sources.flip[basis] == 1))
    if dead_flip.size:
        raise RuntimeError(f"source {dead_flip[0]} flips the logical without any detection event")
    lo = np.minimum(ends[live, 0], ends[live, 1])
    hi = np.maximum(ends[live, 0], ends[live, 1])
    keys, inverse = np.unique(np.stack([lo, hi], axis=1), axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    edge_of = np.full(len(sources), -1, np.int64)
    edge_of[live] = inverse
    return keys, edge_of


def build_detector_graphs(sources: SourceTable) -> tuple[DetectorGraph, DetectorGraph]:
    """Merge the sources into the X and Z detector graphs (in that order)."""
    grouped = {b: _group_edges(sources, b) for b in BASES}
    graphs = {}
    for b in BASES:
        keys, edge_of = grouped[b]
        other_edge = grouped[other(b)][1]
        n_e = len(keys)
        order = np.argsort(edge_of, kind="stable")
        order = order[edge_of[order] >= 0]
        counts = np.bincount(edge_of[order], minlength=n_e)
        src_ptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
        src_ids = order.astype(np.int64)
        prob = sources.prob
        edge_p = np.ones(n_e)
        np.multiply.at(edge_p, edge_of[order], 1.0 - prob[order])
        edge_p = 1.0 - edge_p
        src_total = np.bincount(edge_of[order], weights=prob[order], minlength=n_e)
        flips = sources.flip[b][order]
        edge_flip = np.zeros(n_e, np.uint8)
        edge_flip[edge_of[order]] = flips
        mismatch = np.flatnonzero(edge_flip[edge_of[order]] != flips)
        if mismatch.size:
            e = int(edge_of[order][mismatch[0]])
            raise RuntimeError(
                f"{b} edge {tuple(keys[e])} merges sources with disagreeing logical parity"
            )
        linked = order[other_edge[order] >= 0]
        link_counts = np.bincount(edge_of[linked], minlength=n_e)
        link_ptr = np.concatenate([[0], np.cumsum(link_counts)]).astype(np.int64)
        stabs = sources.layout.stabilizers(b)
        graphs[b] = DetectorGraph(
            basis=b,
            n_vertices=sources.boundary(b) + 1,
            layers=sources.layers,
            n_stabilizers=sources.n_stabilizers[b],
            stabilizer_sites=tuple(s.site for s in stabs),
            edge_u=keys[:, 0].astype(np.int64) if n_e else np.zeros(0, np.int64),
            edge_v=keys[:, 1].astype(np.int64) if n_e else np.zeros(0, np.int64),
            edge_p=edge_p,
            edge_flip=edge_flip,
            src_ptr=src_ptr,
            src_ids=src_ids,
            src_total=src_total,
            link_ptr=link_ptr,
            link_edge=other_edge[linked].astype(np.int64),
            link_prob=prob[linked].astype(np.float64),
        )
    if np.any(graphs["X"].edge_p >= 1.0) or np.any(graphs["Z"].edge_p >= 1.0):
        raise RuntimeError("edge probability reached 1")
    return graphs["X"], graphs["Z"]


def export_graph(graph: DetectorGraph) -> str:
    """JSON document; field order is fixed so files diff cleanly."""
    vertices = []
    for v in range(graph.n_detectors):
        r, c, t = graph.vertex_site(v)
        vertices.append({"id": v, "site": [r, c], "layer": t})
    edges = []
    for e in range(graph.n_edges):
        edges.append(
            {
                "id": e,
                "u": int(graph.edge_u[e]),
                "v": int(graph.edge_v[e]),
                "p_edge": float(graph.edge_p[e]),
                "weight": float(graph.weights[e]),
                "logical_flip": int(graph.edge_flip[e]),
                "source_count": int(graph.src_ptr[e + 1] - graph.src_ptr[e]),
                "sources": graph.sources_of(e).tolist(),
                "p_sources_total": float(graph.src_total[e]),
                "links": [[le, lp] for le, lp in graph.links_of(e)],
            }
        )
    doc = {
        "basis": graph.basis,
        "n_vertices": graph.n_vertices,
        "boundary": graph.boundary,
        "layers": graph.layers,
        "stabilizer_sites": [list(s) for s in graph.stabilizer_sites],
        "vertices": vertices,
        "edges": edges,
    }
    return json.dumps(doc, indent=1)


def import_graph(text: str) -> DetectorGraph:
    doc = json.loads(text)
    edges = doc["edges"]
    n_e = len(edges)
    src_counts = [len(e["sources"]) for e in edges]
    link_counts = [len(e["links"]) for e in edges]
    links = [lk for e in edges for lk in e["links"]]
    return DetectorGraph(
        basis=doc["basis"],
        n_vertices=doc["n_vertices"],
        layers=doc["layers"],
        n_stabilizers=len(doc["stabilizer_sites"]),
        stabilizer_sites=tuple(tuple(s) for s in doc["stabilizer_sites"]),
        edge_u=np.array([e["u"] for e in edges], np.int64),
        edge_v=np.array([e["v"] for e in edges], np.int64),
        edge_p=np.array([e["p_edge"] for e in edges], np.float64),
        edge_flip=np.array([e["logical_flip"] for e in edges], np.uint8),
        src_ptr=np.concatenate([[0], np.cumsum(src_counts)]).astype(np.int64) if n_e else np.zeros(1, np.int64),
        src_ids=np.array([s for e in edges for s in e["sources"]], np.int64),
        src_total=np.array([e["p_sources_total"] for e in edges], np.float64),
        link_ptr=np.concatenate([[0], np.cumsum(link_counts)]).astype(np.int64) if n_e else np.zeros(1, np.int64),
        link_edge=np.array([lk[0] for lk in links], np.int64),
        link_prob=np.array([lk[1] for lk in links], np.float64),
    )


def graphs_equal(a: DetectorGraph, b: DetectorGraph) -> bool:
    arrays = ("edge_u", "edge_v", "edge_p", "edge_flip", "src_ptr", "src_ids",
              "src_total", "link_ptr", "link_edge", "link_prob")
    return (
        a.basis == b.basis
        and a.n_vertices == b.n_vertices
        and a.layers == b.layers
        and a.stabilizer_sites == b.stabilizer_sites
        and all(np.array_equal(getattr(a, k), getattr(b, k)) for k in arrays)
    )
