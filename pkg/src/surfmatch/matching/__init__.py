"""Shortest paths, blossom matching and the matching decoder."""

from .blossom import max_weight_matching
from .brute import MAX_BRUTE_NODES, brute_force_mwpm
from .decoder import (
    JITTER_EPS,
    SMALL_EVENTS,
    Matching,
    SyndromeGraph,
    brute_force_matching,
    build_syndrome_graph,
    correction_parity,
    decode,
    jitter_weights,
    jitter_key,
    match_kernel,
    min_weight_perfect_matching,
    mwpm,
    subset_mate,
    syndrome_distances,
)
from .paths import ShortestPaths, dijkstra_kernel, shortest_paths

__all__ = [
    "JITTER_EPS",
    "MAX_BRUTE_NODES",
    "SMALL_EVENTS",
    "Matching",
    "ShortestPaths",
    "SyndromeGraph",
    "brute_force_matching",
    "brute_force_mwpm",
    "build_syndrome_graph",
    "correction_parity",
    "decode",
    "dijkstra_kernel",
    "jitter_key",
    "jitter_weights",
    "match_kernel",
    "max_weight_matching",
    "min_weight_perfect_matching",
    "mwpm",
    "shortest_paths",
    "subset_mate",
    "syndrome_distances",
]
