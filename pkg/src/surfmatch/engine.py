"""Decoding problems and the compiled per-trial loop.

A :class:`DecodingProblem` bundles the fault-mechanism table and both detector
graphs for one (mode, d, p, rounds) point. Noise is drawn per channel exactly
as the circuit sampler does it: every channel (noisy gate, or data qubit in
perfect-measurement mode) fails with probability ``p`` and then picks one of
its outcomes uniformly. Because fault effects are linear, a trial's detection
events are the XOR of the sampled mechanisms' endpoints and its true logical
flip is the XOR of their flip bits.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._jit import njit
from .circuit import NoiseModel, build_cycle_circuit, sample_fault_kernel
from .correlated import RULE_CONDITIONAL, RULE_PERFECT, reweight_kernel, unit_edges
from .layout import build_layout
from .matching import correction_parity, jitter_weights, match_kernel
from .rng import JITTER_SALT, NOISE_SALT, as_seed, trial_state
from .tracer import DetectorGraph, SourceTable, build_detector_graphs, perfect_sources, trace_all_single_faults

MODES = ("perfect2d", "fault_tolerant3d")
DECODERS = ("independent", "correlated")


@dataclass(frozen=True, eq=False)
class DecodingProblem:
    mode: str
    d: int
    p: float
    rounds: int
    sources: SourceTable
    graph_x: DetectorGraph
    graph_z: DetectorGraph
    chan_ptr: np.ndarray
    chan_size: np.ndarray

    @property
    def n_channels(self) -> int:
        return len(self.chan_size)

    @property
    def rule(self) -> int:
        return RULE_PERFECT if self.mode == "perfect2d" else RULE_CONDITIONAL

    def graph(self, basis: str) -> DetectorGraph:
        return self.graph_x if basis == "X" else self.graph_z

    def sample_sources(self, seed: int, trial: int) -> np.ndarray:
        """Mechanism ids hit in one trial of a run seeded with ``seed``."""
        state = np.array([trial_state(as_seed(seed), trial, NOISE_SALT)], np.uint64)
        chans, outs = sample_fault_kernel(np.arange(self.n_channels, dtype=np.int64),
                                          self.chan_size, self.p, state)
        return self.chan_ptr[chans] + outs

    def events_of(self, source_ids: np.ndarray, basis: str) -> np.ndarray:
        """Sorted detection-event vertices produced by a set of mechanisms."""
        ends = self.sources.ends[basis][source_ids].reshape(-1)
        b = self.sources.boundary(basis)
        ends = ends[(ends >= 0) & (ends != b)]
        vals, counts = np.unique(ends, return_counts=True)
        return vals[counts % 2 == 1].astype(np.int64)

    def logical_flip(self, source_ids: np.ndarray, basis: str) -> int:
        return int(self.sources.flip[basis][source_ids].sum() & 1)


def _channels(sources: SourceTable) -> tuple[np.ndarray, np.ndarray]:
    gate = sources.gate
    if len(gate) == 0:
        return np.zeros(1, np.int64), np.zeros(0, np.int64)
    starts = np.flatnonzero(np.concatenate([[True], gate[1:] != gate[:-1]]))
    ptr = np.concatenate([starts, [len(gate)]]).astype(np.int64)
    return ptr, np.diff(ptr).astype(np.int64)


@lru_cache(maxsize=16)
def build_problem(mode: str, d: int, p: float, rounds: int | None = None) -> DecodingProblem:
    """Trace all mechanisms and assemble both graphs (cached per process)."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if not 0.0 < p < 0.5:
        raise ValueError(f"problem construction needs 0 < p < 0.5, got {p}")
    if d < 3:
        raise ValueError("decoding needs d >= 3")
    layout = build_layout(d)
    if mode == "perfect2d":
        rounds = 1
        sources = perfect_sources(layout, p)
    else:
        rounds = d if rounds is None else int(rounds)
        if rounds < 1:
            raise ValueError("rounds must be >= 1")
        circuit = build_cycle_circuit(layout, rounds)
        sources = trace_all_single_faults(circuit, NoiseModel(p), layout)
    gx, gz = build_detector_graphs(sources)
    ptr, size = _channels(sources)
    return DecodingProblem(mode, d, p, rounds, sources, gx, gz, ptr, size)


def _graph_tuple(g: DetectorGraph):
    ptr, nbr, eid = g.adjacency
    return (ptr, nbr, eid, np.ascontiguousarray(g.weights), g.edge_u, g.edge_v, g.edge_flip,
            g.edge_p, g.src_total, g.link_ptr, g.link_edge, g.link_prob, np.int64(g.boundary))


@njit
def _collect_events(src, n_src, ends, boundary, parity, buf):
    n = 0
    for i in range(n_src):
        for c in range(2):
            v = ends[src[i], c]
            if v >= 0 and v != boundary:
                parity[v] ^= 1
                buf[n] = v
                n += 1
    m = 0
    out = np.empty(n, np.int64)
    for i in range(n):
        v = buf[i]
        if parity[v] == 1:
            out[m] = v
            m += 1
            parity[v] = 0
    for i in range(n):
        parity[buf[i]] = 0
    return np.sort(out[:m])


# Graph tuples are unpacked at every call: handing the whole tuple to a helper
# together with a fresh weight array makes numba emit markedly slower code.
@njit
def _match(ptr, nbr, eid, w, edge_u, edge_v, boundary, edge_flip, events):
    partner, pw, pptr, pedges = match_kernel(ptr, nbr, eid, w, edge_u, edge_v, boundary, events)
    return correction_parity(pedges, edge_flip), partner, pptr, pedges


@njit
def _reweighted(src_total, link_ptr, link_edge, link_prob, dst_p, dst_w, units, rule, replace,
                factor, stamp, acc, touched):
    n, new_p = reweight_kernel(units, src_total, link_ptr, link_edge, link_prob, dst_p, rule,
                               replace, factor, stamp, acc, touched)
    if n == 0:
        return False, dst_w
    w = dst_w.copy()
    for i in range(n):
        w[touched[i]] = -np.log(new_p[i])
    return True, w


@njit
def run_trials_kernel(master, start, count, p, chan_ptr, chan_size, ends_x, ends_z, flip_x, flip_z,
                      gx, gz, correlated, rule, replace, eps, fail_x, fail_z):
    """Run trials ``start .. start+count-1``; per-trial failure flags go to ``fail_x``/``fail_z``.

    ``fail_x`` marks logical X failures (decided on the Z-stabilizer graph),
    ``fail_z`` logical Z failures (decided on the X-stabilizer graph).
    """
    n_chan = chan_size.shape[0]
    chans = np.arange(n_chan)
    par_x = np.zeros(gx[12] + 1, np.uint8)
    par_z = np.zeros(gz[12] + 1, np.uint8)
    sx = (np.ones(gx[4].shape[0]), np.full(gx[4].shape[0], -1, np.int64),
          np.zeros(gx[4].shape[0]), np.zeros(gx[4].shape[0], np.int64))
    sz = (np.ones(gz[4].shape[0]), np.full(gz[4].shape[0], -1, np.int64),
          np.zeros(gz[4].shape[0]), np.zeros(gz[4].shape[0], np.int64))
    state = np.zeros(1, np.uint64)
    buf = np.empty(16, np.int64)
    for t in range(count):
        idx = start + t
        state[0] = trial_state(master, idx, NOISE_SALT)
        cs, outs = sample_fault_kernel(chans, chan_size, p, state)
        ns = cs.shape[0]
        fail_x[t] = 0
        fail_z[t] = 0
        if ns == 0:
            continue
        src = chan_ptr[cs] + outs
        if buf.shape[0] < 2 * ns:
            buf = np.empty(4 * ns, np.int64)
        actual_x = 0
        actual_z = 0
        for i in range(ns):
            actual_z ^= flip_x[src[i]]
            actual_x ^= flip_z[src[i]]
        ev_x = _collect_events(src, ns, ends_x, gx[12], par_x, buf)
        ev_z = _collect_events(src, ns, ends_z, gz[12], par_z, buf)
        key = trial_state(master, idx, JITTER_SALT)
        wx = gx[3]
        wz = gz[3]
        cx = 0
        cz = 0
        if ev_x.shape[0] > 0:
            wx = jitter_weights(gx[3], key, eps)
            cx, px, pptr_x, pe_x = _match(gx[0], gx[1], gx[2], wx, gx[4], gx[5], gx[12], gx[6], ev_x)
        if ev_z.shape[0] > 0:
            wz = jitter_weights(gz[3], key, eps)
            cz, pz, pptr_z, pe_z = _match(gz[0], gz[1], gz[2], wz, gz[4], gz[5], gz[12], gz[6], ev_z)
        if correlated and (ev_x.shape[0] > 0 or ev_z.shape[0] > 0):
            hit_x = False
            hit_z = False
            if ev_x.shape[0] > 0:
                units_x = unit_edges(px, pptr_x, pe_x)
                hit_z, w2z = _reweighted(gx[8], gx[9], gx[10], gx[11], gz[7], gz[3], units_x, rule,
                                         replace, sz[0], sz[1], sz[2], sz[3])
            if ev_z.shape[0] > 0:
                units_z = unit_edges(pz, pptr_z, pe_z)
                hit_x, w2x = _reweighted(gz[8], gz[9], gz[10], gz[11], gx[7], gx[3], units_z, rule,
                                         replace, sx[0], sx[1], sx[2], sx[3])
            if hit_x and ev_x.shape[0] > 0:
                cx, px, pptr_x, pe_x = _match(gx[0], gx[1], gx[2], jitter_weights(w2x, key, eps),
                                              gx[4], gx[5], gx[12], gx[6], ev_x)
            if hit_z and ev_z.shape[0] > 0:
                cz, pz, pptr_z, pe_z = _match(gz[0], gz[1], gz[2], jitter_weights(w2z, key, eps),
                                              gz[4], gz[5], gz[12], gz[6], ev_z)
        fail_z[t] = actual_z ^ cx
        fail_x[t] = actual_x ^ cz


def run_trials(problem: DecodingProblem, seed: int, start: int, count: int,
               decoder: str = "independent", replace: bool = False,
               eps: float = 1e-6) -> tuple[np.ndarray, np.ndarray]:
    """Per-trial (logical X failure, logical Z failure) flags for a block of trials."""
    if decoder not in DECODERS:
        raise ValueError(f"decoder must be one of {DECODERS}, got {decoder!r}")
    fx = np.zeros(count, np.uint8)
    fz = np.zeros(count, np.uint8)
    src = problem.sources
    run_trials_kernel(as_seed(seed), np.int64(start), np.int64(count), float(problem.p),
                      problem.chan_ptr, problem.chan_size, src.ends["X"], src.ends["Z"],
                      src.flip["X"], src.flip["Z"], _graph_tuple(problem.graph_x),
                      _graph_tuple(problem.graph_z), decoder == "correlated", problem.rule,
                      replace, eps, fx, fz)
    return fx, fz
